//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. The variants
//! are deliberately coarse: callers branch on the *kind* of failure (bad
//! input file vs. infeasible instance vs. numerical domain violation), not on
//! the exact message text.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong length for the instance it was used
    /// with.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A schedule violates the per-team selection targets, or the targets
    /// themselves cannot be met by any selection.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A numeric argument was outside its mathematical domain (probability
    /// at 0 or 1, negative sample count, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance or run configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A dataset cannot support the requested fit (single-class labels,
    /// too few rows for the requested split, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The league instance makes a quantity undefined (team with no played
    /// games, zero opponent strength, ...).
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// A label or identifier did not match anything known.
    #[error("unknown key: {0}")]
    UnknownKey(String),

    /// A problem in an input file, with its location.
    #[error("{path}:{row}: {message}")]
    Ingest {
        path: String,
        row: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for an [`Error::Ingest`] at a known file location.
    pub fn ingest(path: impl Into<String>, row: usize, message: impl Into<String>) -> Self {
        Error::Ingest {
            path: path.into(),
            row,
            message: message.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
