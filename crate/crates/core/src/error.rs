use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the rule learning library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("cannot parse {value:?} as {kind} at row {row}, column {column}")]
    Parse {
        row: usize,
        column: String,
        value: String,
        kind: &'static str,
    },

    #[error("unknown label value {value:?} in column {column}")]
    UnknownLabel { column: String, value: String },

    #[error("column {0:?} not found in input")]
    UnknownColumn(String),

    #[error("table is empty")]
    EmptyTable,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feature {0} has no negation partner")]
    MissingNegation(usize),

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported rule file version {0}")]
    UnsupportedVersion(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
