//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands or subsystem descriptors do not have compatible dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input violates a precondition (zero vector, non-unit trace, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A configuration file could not be parsed or validated.
    #[error("config error (line {line}, key `{key}`): {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    /// A propagation run failed (blow-up, unphysical output, ...).
    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
