use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("cannot parse {value:?} as a finite number at row {row}, column {column}")]
    ParseCell { row: usize, column: String, value: String },

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {class} has {count} points, leaving remainder {remainder} for gamma = {gamma}")]
    NotDivisible {
        class: usize,
        count: usize,
        gamma: usize,
        remainder: usize,
    },

    #[error("assignment is not gamma-balanced: {0}")]
    NotBalanced(String),

    #[error("boosting needs exactly two classes, found {0}")]
    NonBinary(usize),

    #[error("boosting needs both classes present in the training data (positive rate {0})")]
    SingleClass(f64),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("malformed model: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error originates from the filesystem rather than from bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. }) || matches!(self, Error::Csv { source, .. } if source.is_io_error())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
