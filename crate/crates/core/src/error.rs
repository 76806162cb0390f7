use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature for {what} did not converge: partial value {partial:e}, error estimate {error:e}")]
    Quadrature {
        what: String,
        partial: f64,
        error: f64,
    },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("invalid process specification: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
