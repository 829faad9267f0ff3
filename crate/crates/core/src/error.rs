use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("{path}: duplicate occupation {term:?} on lines {first} and {second}")]
    DuplicateOccupation {
        path: PathBuf,
        term: String,
        first: usize,
        second: usize,
    },

    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: duplicate id {id:?} on lines {first} and {second}")]
    DuplicateId {
        path: PathBuf,
        id: String,
        first: usize,
        second: usize,
    },

    #[error("{path}: no sets found")]
    NoSets { path: PathBuf },

    #[error("unbound placeholder {{{0}}}")]
    UnboundPlaceholder(String),

    #[error("invalid template: {0}")]
    Template(String),

    #[error("occupation list is empty")]
    NoOccupations,

    #[error("invalid backend configuration: {0}")]
    Config(String),

    #[error("mock translator: {0}")]
    Mock(String),

    #[error("unknown source id {0:?}")]
    UnknownSource(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("digest mismatch for {path}: manifest records {expected}, file hashes to {actual}")]
    DigestMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
