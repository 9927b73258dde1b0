use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {t} is below the validity threshold {threshold}")]
    BelowThreshold { t: f64, threshold: f64 },

    #[error("quadrature did not converge: value {value}, error estimate {error} after {subdivisions} subdivisions")]
    QuadratureFailed {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand does not decay: {0}")]
    NotDecaying(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("fixed-point iteration for the de Bruijn conjugate did not converge at t = {probe}")]
    FixedPointDiverged { probe: f64 },

    #[error("root finding failed: {0}")]
    RootNotFound(String),

    #[error("out of theorem scope: {0}")]
    OutOfScope(String),

    #[error("not serializable: {0}")]
    NotSerializable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
