use thiserror::Error;

/// Errors produced by the tensor algebra, estimators and inference routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid shapes, ranks, indices or parameter values supplied by the caller.
    #[error("argument error: {0}")]
    Argument(String),
    /// A computation could not be carried out in floating point (non-finite data,
    /// rank-deficient systems, divergence).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Malformed TNSR or dataset payload.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn numeric<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numeric(msg.into()))
}
