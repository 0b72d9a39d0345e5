//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the fedzsl library.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or shape mismatch between inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input collection that must be non-empty was empty.
    #[error("empty input: {0}")]
    Empty(String),

    /// A file had no data rows.
    #[error("no rows in {0}")]
    NoRows(String),

    /// A features row referenced a class id absent from the attribute table.
    #[error("unknown class {class} at line {line}")]
    UnknownClass { class: usize, line: usize },

    /// A numeric field failed to parse.
    #[error("malformed numeric field {field:?} at line {line}: {source}")]
    MalformedNumber {
        field: String,
        line: usize,
        source: std::num::ParseFloatError,
    },

    /// CSV structure problem (missing header, wrong column count, ...).
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },

    /// Invalid argument value (out-of-range parameter, infeasible constraint).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Numerical failure (singular matrix, non-positive-definite factorization).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Run configuration failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml error: {0}")]
    Toml(String),
}

pub type Result<T> = std::result::Result<T, Error>;
