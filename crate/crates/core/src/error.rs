use thiserror::Error;

use crate::experiments::checkpoint::CheckpointError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was handed data in the wrong representation, on the wrong
    /// grid, or with the wrong number of components.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Non-finite coefficients or runaway energy during time stepping.
    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("fit failed: {0}")]
    Fit(String),

    /// A quadrature could not certify its own accuracy.
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
