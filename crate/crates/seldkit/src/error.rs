//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SeldError>;

/// Everything that can go wrong in the toolkit.
///
/// Variants are grouped by failure site rather than by module: callers mostly
/// care whether a problem is bad input data, a bad configuration, or an I/O
/// failure, and the CLI maps those onto exit codes.
#[derive(Debug, Error)]
pub enum SeldError {
    /// A function argument or in-memory structure violated an invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Filesystem-level failure, with the path that caused it.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A WAV file could not be read or written.
    #[error("{}: {message}", path.display())]
    Wav { path: PathBuf, message: String },

    /// A metadata CSV row failed to parse or validate.
    #[error("{}:{line}: {message}", path.display())]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A binary tensor file is malformed.
    #[error("{}: {message}", path.display())]
    Tensor { path: PathBuf, message: String },

    /// A config file failed to parse.
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
}

impl SeldError {
    /// Convenience constructor for [`SeldError::Io`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SeldError::Io {
            path: path.into(),
            source,
        }
    }

    /// Convenience constructor for [`SeldError::InvalidInput`].
    pub fn invalid(message: impl Into<String>) -> Self {
        SeldError::InvalidInput(message.into())
    }
}
