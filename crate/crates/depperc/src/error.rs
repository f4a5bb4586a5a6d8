//! Error type shared by the whole crate.
//!
//! The variants map onto the CLI exit codes: invalid parameters exit with 2,
//! exceeded resource guards with 3, and I/O failures with 4.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (probability outside
    /// [0,1], zero half-width, malformed input file, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A parameter is valid but exceeds a resource guard (state vectors,
    /// enumeration sizes). The guards exist so calls fail fast instead of
    /// exhausting memory or running for days.
    #[error("guard exceeded: {0}")]
    Guard(String),

    /// Reading or writing a file failed.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand for an invalid-parameter error.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    /// Shorthand for a guard-exceeded error.
    pub fn guard(msg: impl Into<String>) -> Self {
        Error::Guard(msg.into())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
