use std::path::PathBuf;

use crate::corpus::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: field `{field}`: {reason}")]
    MalformedRow {
        row: usize,
        field: String,
        reason: String,
    },

    #[error("duplicate grant_id `{grant_id}` at row {row}")]
    DuplicateGrantId { grant_id: String, row: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("class {0:?} has no instances")]
    EmptyClass(Label),

    #[error("need at least {needed} instances, got {got}")]
    TooFewInstances { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("document `{0}` has no text after normalization")]
    EmptyDocument(String),

    #[error("record `{grant_id}` has no `{field}` field")]
    MissingField { grant_id: String, field: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("model `{0}` does not retain impurity records")]
    UnsupportedModel(String),

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("non-finite loss at epoch {epoch}: {loss}")]
    NonFiniteLoss { epoch: usize, loss: f64 },

    #[error("critical difference table covers k in {min}..={max}, got k = {k}")]
    UnsupportedRankCount { k: usize, min: usize, max: usize },

    #[error("{path}:{line}: {reason}")]
    Lexicon {
        path: String,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
