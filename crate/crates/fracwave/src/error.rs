//! Crate-wide error type.

use thiserror::Error;

/// Unified error type for the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter was outside its admissible range.
    #[error("invalid parameter {name}: {message} (got {value})")]
    InvalidParameter {
        /// Parameter name as exposed in configuration.
        name: &'static str,
        /// Why the value is rejected.
        message: String,
        /// Offending value.
        value: f64,
    },

    /// A structural precondition failed (dimensions, orderings, geometry).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("{what} did not converge: {detail}")]
    NoConvergence {
        /// Which routine failed.
        what: &'static str,
        /// Residual/iteration details.
        detail: String,
    },

    /// A numerical verification that must hold failed.
    #[error("verification failed: {0}")]
    VerificationFailed(String),

    /// Configuration file syntax or validation error.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed data file (profile tables, CSV, field snapshots).
    #[error("format error in {path}: {message}")]
    Format {
        /// File being parsed.
        path: String,
        /// What was wrong.
        message: String,
    },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand constructor for [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, value: f64, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
            value,
        }
    }

    /// Shorthand constructor for [`Error::Precondition`].
    pub fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// Shorthand constructor for [`Error::Format`] on an anonymous stream.
    pub fn format(message: impl Into<String>) -> Self {
        Error::Format {
            path: "<input>".to_string(),
            message: message.into(),
        }
    }
}
