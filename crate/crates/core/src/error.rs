use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("dataset is empty")]
    Empty,
    #[error("fewer than 2 classes")]
    SingleClass,
    #[error("attribute {0} has no observed values")]
    AllMissing(usize),
    #[error("unknown value {value} for discrete attribute {attribute}")]
    UnknownValue { attribute: usize, value: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("hierarchy contains a cycle through node {0}")]
    Cycle(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
