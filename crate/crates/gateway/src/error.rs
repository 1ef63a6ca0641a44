use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GatewayError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("session {0} not found")]
    NotFound(String),

    #[error("mask hash does not match the last masked prompt; mask again before dispatch")]
    StaleMask,

    #[error("invalid edit: {0}")]
    InvalidEdit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("storage failure at {path}: {source}")]
    StorageFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] veilgate_core::Error),
}

impl GatewayError {
    pub(crate) fn storage(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GatewayError::StorageFailure {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        use veilgate_core::Error as E;
        match self {
            GatewayError::NotFound(_) => "not_found",
            GatewayError::StaleMask => "stale_mask",
            GatewayError::InvalidEdit(_) => "invalid_edit",
            GatewayError::Config(_) => "invalid_config",
            GatewayError::StorageFailure { .. } => "storage_failure",
            GatewayError::Core(e) => match e {
                E::UpstreamUnavailable { .. } => "upstream_unavailable",
                E::ProtocolError { .. } => "protocol_error",
                E::MalformedReply { .. } => "malformed_reply",
                E::CorruptVault(_) => "corrupt_vault",
                E::Storage { .. } => "storage_failure",
                E::SpanMismatch { .. } | E::OverlapViolation { .. } | E::InvalidMention(_) => "invalid_mention",
                E::UnknownLabel(_) => "unknown_label",
                E::Json(_) => "invalid_json",
                _ => "internal",
            },
        }
    }
}
