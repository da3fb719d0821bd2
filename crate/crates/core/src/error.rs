use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed report document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unparseable date {value:?} on row {row}")]
    Date { row: usize, value: String },
    #[error("column {0} not found")]
    MissingColumn(String),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series too short: need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("q = {0} is not on the exponent grid")]
    MissingQ(f64),
    #[error("date {0} not present in series")]
    DateNotFound(NaiveDate),
    #[error("series are not aligned: {0}")]
    Misaligned(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
