use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::service::{DispatchRequest, Gateway};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRequest {
    pub prompt: String,
}

impl GatewayError {
    pub fn status(&self) -> StatusCode {
        match self.code() {
            "not_found" => StatusCode::NOT_FOUND,
            "stale_mask" => StatusCode::CONFLICT,
            "invalid_edit" | "invalid_mention" | "unknown_label" | "invalid_json" => StatusCode::UNPROCESSABLE_ENTITY,
            "upstream_unavailable" | "protocol_error" | "malformed_reply" => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}

type Shared = Arc<Gateway>;

/// Runs a blocking gateway call off the async workers.
async fn blocking<T, F>(gateway: Shared, f: F) -> Result<Json<T>, GatewayError>
where
    T: Send + 'static,
    F: FnOnce(&Gateway) -> crate::error::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&gateway))
        .await
        .map_err(|e| GatewayError::Config(format!("worker failed: {e}")))?
        .map(Json)
}

async fn create_session(State(gateway): State<Shared>) -> Response {
    match blocking(gateway, |g| g.create_session()).await {
        Ok(body) => (StatusCode::CREATED, body).into_response(),
        Err(e) => e.into_response(),
    }
}

/// Parses a request body so that bad JSON gets the usual error shape.
fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, GatewayError> {
    serde_json::from_slice(body).map_err(|e| GatewayError::Core(e.into()))
}

async fn mask(
    State(gateway): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, GatewayError> {
    let request: MaskRequest = parse(&body)?;
    blocking(gateway, move |g| g.mask_prompt(&id, &request.prompt)).await
}

async fn dispatch(
    State(gateway): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, GatewayError> {
    let request: DispatchRequest = parse(&body)?;
    blocking(gateway, move |g| g.dispatch(&id, &request)).await
}

async fn vault(State(gateway): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, GatewayError> {
    blocking(gateway, move |g| g.vault(&id)).await
}

async fn transcript(
    State(gateway): State<Shared>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, GatewayError> {
    blocking(gateway, move |g| g.transcript(&id)).await
}

pub fn router(gateway: Shared) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}/mask", post(mask))
        .route("/v1/sessions/{id}/dispatch", post(dispatch))
        .route("/v1/sessions/{id}/vault", get(vault))
        .route("/v1/sessions/{id}/transcript", get(transcript))
        .with_state(gateway)
}

/// Serves until `shutdown` resolves, then writes every loaded session to disk.
pub async fn serve(
    listener: tokio::net::TcpListener,
    gateway: Shared,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr()?, "gateway listening");
    axum::serve(listener, router(gateway.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    let flushed = tokio::task::spawn_blocking(move || gateway.flush()).await;
    match flushed {
        Ok(Ok(())) => Ok(()),
        Ok(Err(e)) => Err(std::io::Error::other(e.to_string())),
        Err(e) => Err(std::io::Error::other(e.to_string())),
    }
}
