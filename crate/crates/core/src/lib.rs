//! Pseudo-spectral solver and experiment harness for the viscous Camassa-Holm
//! alpha equations with fractional dissipation on a periodic box.

pub mod datum;
pub mod diagnostics;
pub mod error;
pub mod experiments;
mod fft;
pub mod field;
pub mod field_ops;
pub mod grid;
pub mod helmholtz;
pub mod integrator;
pub mod kernels;
pub mod multiplier;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Direction, Representation, ScalarField, VectorField};
pub use grid::SpectralGrid;
pub use multiplier::Multiplier;
