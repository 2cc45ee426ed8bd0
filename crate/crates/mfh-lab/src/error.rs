//! Error type shared across the library.
//!
//! Two error families matter to callers: configuration/usage problems
//! (bad config file, invalid argument values, IO) and numerical failures
//! (rank-deficient Grams, non-converging iterations). The CLI maps the
//! former to exit code 2 and the latter to exit code 3, naming the stage
//! that failed.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration file problems: unknown keys, parse errors, bad values.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid argument to a library operation.
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A numerical procedure failed; `stage` names the offending computation.
    #[error("numerical failure in {stage}: {message}")]
    Numerical { stage: String, message: String },

    /// Filesystem problems while reading or writing experiment artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Convenience constructor for numerical failures.
    pub fn numerical(stage: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Numerical { stage: stage.into(), message: message.into() }
    }

    /// Process exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 3,
            _ => 2,
        }
    }
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
