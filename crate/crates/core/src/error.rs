use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unknown or missing column: {0}")]
    Column(String),

    #[error("row {row}, column `{column}`: {reason}")]
    Value {
        row: usize,
        column: &'static str,
        reason: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero variance in continuous column `{0}`")]
    ZeroVariance(&'static str),

    #[error("invalid split: {0}")]
    Split(String),

    #[error("invalid architecture: {0}")]
    Architecture(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("AUC undefined: only one class present")]
    SingleClass,

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{0}")]
    Report(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
