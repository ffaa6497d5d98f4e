use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the scoring, selection, and corpus layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate hadm_id {id:?} on lines {first} and {second}")]
    DuplicateDocument { id: String, first: usize, second: usize },

    #[error("duplicate candidate ({hadm_id}, {model_id}, {target}) on lines {first} and {second}")]
    DuplicateCandidate {
        hadm_id: String,
        model_id: String,
        target: String,
        first: usize,
        second: usize,
    },

    #[error("unknown target kind {0:?} (expected \"bhc\" or \"di\")")]
    UnknownTarget(String),

    #[error("undefined input: {0}")]
    UndefinedInput(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no reference for hadm_id {hadm_id} ({target})")]
    MissingReference { hadm_id: String, target: String },

    #[error("hadm_id {0} has no discharge summary")]
    UnresolvedDocument(String),

    #[error("missing score cell(s): {}", .0.join("; "))]
    MissingCells(Vec<String>),

    #[error("metric {0:?} collides with a natively computed metric")]
    MetricCollision(String),

    #[error("duplicate score cell {0}")]
    DuplicateCell(String),

    #[error("unknown identifiers: {}", .0.join(", "))]
    UnknownIds(Vec<String>),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("overall score components: {0}")]
    Components(String),

    #[error("document {0} has no candidates")]
    NoCandidates(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
