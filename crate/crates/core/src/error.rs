use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("item {qid} references unknown document {doc_id}")]
    DanglingDocument { qid: String, doc_id: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero vector from embedding provider {provider_id}")]
    ZeroVector { provider_id: String },

    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),

    #[error("reader unavailable: {0}")]
    ReaderUnavailable(String),

    #[error("remote call to {url} failed: {message}")]
    Remote { url: String, message: String },

    #[error("unknown qid {0}")]
    UnknownQid(String),

    #[error("no items carry a gold alignment")]
    NoAlignedItems,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from user-supplied input (files, flags,
    /// identifiers) rather than a fault inside the engine or a remote backend.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::ZeroVector { .. } | Error::Remote { .. } | Error::DimensionMismatch { .. }
        )
    }
}
