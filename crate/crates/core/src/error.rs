use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge on [{lo}, {hi}]: estimate {estimate:e}, \
         error {error_estimate:e} > tolerance {tolerance:e}"
    )]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        error_estimate: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN and negative values.
pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::Domain(format!("{name} must be >= 0, got {value}")));
    }
    Ok(())
}
