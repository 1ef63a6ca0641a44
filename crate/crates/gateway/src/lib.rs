//! HTTP gateway and command line front end: masks prompts for review,
//! forwards approved prompts to an upstream model and restores the reply.

pub mod cli;
pub mod config;
pub mod error;
pub mod server;
pub mod service;
pub mod session;

pub use config::GatewayConfig;
pub use error::{GatewayError, Result};
pub use service::{apply_edits, mask_hash, DispatchRequest, DispatchResponse, Edit, Gateway, MaskResponse};
pub use session::{Exchange, Session, SessionStore};
