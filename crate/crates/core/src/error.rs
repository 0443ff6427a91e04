use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    #[error("unparsable label `{value}` at data row {row}")]
    UnparsableLabel { row: usize, value: String },
    #[error("corpus has no data rows")]
    EmptyCorpus,
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("empty comment at data row {0}")]
    EmptyComment(usize),
    #[error("class counts requested on an unlabeled corpus")]
    UnlabeledCorpus,
    #[error("no term has document frequency >= {min_df}")]
    EmptyVocabulary { min_df: usize },
    #[error("both classes must be present in the training labels")]
    SingleClassCorpus,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("column {column} out of range for a matrix with {cols} columns")]
    ColumnOutOfRange { column: usize, cols: usize },
    #[error("cannot build {k} stratified folds: class {class} has only {count} examples")]
    FoldInfeasible {
        k: usize,
        class: &'static str,
        count: usize,
    },
    #[error("length mismatch: {predicted} predictions vs {gold} gold labels")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("nothing to report")]
    EmptyReport,
    #[error("unknown run `{name}`; registry contains: {known}")]
    UnknownRun { name: String, known: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("fine-tuning component unavailable: {0}")]
    MissingComponent(String),
    #[error("fine-tuning component failed: {0}")]
    ComponentFailed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
