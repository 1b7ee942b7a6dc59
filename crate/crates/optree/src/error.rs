use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}: no such label column")]
    UnknownLabelColumn(String),
    #[error("{path}: column `{column}` has value `{value}` outside the schema")]
    UnknownCategory {
        path: PathBuf,
        column: String,
        value: String,
    },
    #[error("{path}: row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("{path}: empty cell at row {row}, column `{column}`")]
    EmptyCell {
        path: PathBuf,
        row: usize,
        column: String,
    },
    #[error("{0}: dataset has no rows")]
    EmptyDataset(PathBuf),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] optree_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
