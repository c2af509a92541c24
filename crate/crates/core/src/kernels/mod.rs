//! Independent reference computations: the fractional heat kernel, the
//! singular-integral fractional Laplacian, its normalization constant and
//! fractional Sobolev seminorms.

pub mod bessel;
pub mod fractional_integral;
pub mod gagliardo;
pub mod heat_kernel;
pub mod quadrature;

pub use fractional_integral::{
    integral_fractional_laplacian, multiplier_fractional_laplacian_1d, normalization_constant, IntegralOptions,
};
pub use gagliardo::{gagliardo_seminorm_double_integral_1d, gagliardo_seminorm_fourier, gagliardo_seminorm_fourier_1d};
pub use heat_kernel::{
    expected_kernel_slope, heat_kernel_values, kernel_lp_norm, kernel_lp_norm_slope, kernel_profile, scaling_deviation,
    HeatKernelSpec, KernelVariant, SlopeFit,
};
