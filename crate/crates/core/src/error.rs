use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge ({context}): partial integral {partial:e}, error estimate {error:e}")]
    NonConvergence {
        context: String,
        partial: f64,
        error: f64,
    },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("lévy white noise is not tempered (beta0 = 0); use the local kind")]
    NotTempered,

    #[error("invalid characteristic function: {0}")]
    InvalidCharacteristicFunction(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
