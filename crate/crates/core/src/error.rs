use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: String },

    #[error("duplicate article id `{0}`")]
    DuplicateId(String),

    #[error("invalid record: {0}")]
    Validation(String),

    #[error("no extractable host in `{0}`")]
    NoHost(String),

    #[error("insufficient evidence: {0}")]
    InsufficientEvidence(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("unknown article id `{0}`")]
    UnknownArticle(String),

    #[error("no media profile for domain `{0}`")]
    MissingProfile(String),

    #[error("claim has no content tokens")]
    EmptyClaim,

    #[error("article `{0}` has an empty body")]
    EmptyBody(String),

    #[error("instance too large for brute-force oracle: {0}")]
    OracleRefused(String),

    #[error("corrupt snapshot file {path}: {message}")]
    CorruptSnapshot { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

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

pub type Result<T, E = Error> = std::result::Result<T, E>;
