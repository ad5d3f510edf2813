use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] fwboost_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("row {row}, column {column:?}: cannot read {value:?} as a finite number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("{}: no data rows", .0.display())]
    Empty(PathBuf),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
