//! Chat-completions client used for the upstream model and the detector model.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// Anything that turns a message list into one reply.
pub trait ChatClient: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String>;
}

impl<T: ChatClient + ?Sized> ChatClient for std::sync::Arc<T> {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        (**self).complete(messages)
    }
}

impl<T: ChatClient + ?Sized> ChatClient for &T {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        (**self).complete(messages)
    }
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

/// Client for `POST <base>/v1/chat/completions`.
///
/// One request per call. Transport failures and non-success statuses are
/// reported as [`Error::UpstreamUnavailable`]; nothing is retried.
#[derive(Debug, Clone)]
pub struct HttpChatClient {
    endpoint: String,
    model: String,
    temperature: f64,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    pub fn new(base_url: &str, model: impl Into<String>, timeout: Duration) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::upstream(format!("building http client: {e}")))?;
        Ok(HttpChatClient {
            endpoint: format!("{}/v1/chat/completions", base_url.trim_end_matches('/')),
            model: model.into(),
            temperature: 0.0,
            http,
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        let request = ChatRequest {
            model: &self.model,
            messages,
            temperature: self.temperature,
        };
        let response = self
            .http
            .post(&self.endpoint)
            .json(&request)
            .send()
            .map_err(|e| Error::upstream(format!("POST {}: {e}", self.endpoint)))?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| Error::upstream(format!("reading response body: {e}")))?;
        if !status.is_success() {
            return Err(Error::UpstreamUnavailable {
                message: format!("upstream returned HTTP {status}"),
                raw: Some(body),
            });
        }
        reply_content(&body)
    }
}

/// Pulls `choices[0].message.content` out of a response envelope.
pub fn reply_content(body: &str) -> Result<String> {
    let protocol = |message: &str| Error::ProtocolError {
        message: message.to_string(),
        raw: Some(body.to_string()),
    };
    let envelope: Value = serde_json::from_str(body).map_err(|_| protocol("response is not JSON"))?;
    envelope
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| protocol("missing choices[0].message.content"))
}

/// Test upstream that answers with the last user message verbatim.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoClient;

impl ChatClient for EchoClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        Ok(messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.clone())
            .unwrap_or_default())
    }
}
