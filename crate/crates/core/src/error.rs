//! Crate-wide error type and result alias.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes that cannot be combined by the requested operation.
    #[error("shape error: {0}")]
    Shape(String),
    /// Invalid configuration values (kernel sizes, exponents, strategy names).
    #[error("config error: {0}")]
    Config(String),
    /// An API called in a way its contract forbids (empty tape, empty dataset).
    #[error("usage error: {0}")]
    Usage(String),
    /// Non-finite values or numerically impossible requests.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Malformed input files (CSV, JSON).
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
