use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rule for {label}: {message}")]
    InvalidRule { label: String, message: String },

    #[error("invalid gazetteer entry for {label}: {message}")]
    InvalidGazetteer { label: String, message: String },

    #[error("upstream unavailable: {message}")]
    UpstreamUnavailable {
        message: String,
        /// Raw body returned by the upstream, if any, kept for audit.
        raw: Option<String>,
    },

    #[error("malformed detector reply: {message}")]
    MalformedReply { message: String, raw: String },

    #[error("protocol error: {message}")]
    ProtocolError { message: String, raw: Option<String> },

    #[error("span {start}..{end} does not reproduce surface {surface:?}")]
    SpanMismatch {
        surface: String,
        start: usize,
        end: usize,
    },

    #[error("mentions overlap or are unsorted at {start}..{end}")]
    OverlapViolation { start: usize, end: usize },

    #[error("invalid mention: {0}")]
    InvalidMention(String),

    #[error("unknown entity label {0:?}")]
    UnknownLabel(String),

    #[error("unknown task type {0:?}")]
    UnknownTaskType(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("corrupt vault: {0}")]
    CorruptVault(String),

    #[error("storage failure at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn storage(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Storage {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn upstream(message: impl Into<String>) -> Self {
        Error::UpstreamUnavailable {
            message: message.into(),
            raw: None,
        }
    }
}
