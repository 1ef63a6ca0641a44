#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use veilgate::{Gateway, GatewayConfig};
use veilgate_core::chat::{ChatClient, ChatMessage, HttpChatClient};
use veilgate_core::detection::{Detector, PatternDetector, RuleSet};
use veilgate_core::EntityLabel;

pub const TIMEOUT: Duration = Duration::from_secs(10);
pub const SENTENCE: &str = "My name is John Doe and I live in London.";

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap()
}

/// Serves `router` on an ephemeral port from a background thread.
pub fn spawn_router(router: Router) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        runtime().block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

fn envelope(content: &str) -> Value {
    json!({ "choices": [{ "index": 0, "message": { "role": "assistant", "content": content } }] })
}

/// Chat-completions server that echoes the last message and keeps every raw
/// request body it receives.
pub struct EchoServer {
    pub url: String,
    pub bodies: Arc<Mutex<Vec<String>>>,
}

impl EchoServer {
    pub fn start() -> Self {
        let bodies: Arc<Mutex<Vec<String>>> = Arc::default();
        let seen = bodies.clone();
        let router = Router::new().route(
            "/v1/chat/completions",
            post(move |raw: Bytes| {
                let seen = seen.clone();
                async move {
                    let text = String::from_utf8(raw.to_vec()).unwrap();
                    let body: Value = serde_json::from_str(&text).unwrap();
                    seen.lock().unwrap().push(text);
                    let last = body["messages"].as_array().unwrap().last().unwrap()["content"]
                        .as_str()
                        .unwrap()
                        .to_string();
                    Json(envelope(&last))
                }
            }),
        );
        EchoServer {
            url: spawn_router(router),
            bodies,
        }
    }

    pub fn client(&self) -> Arc<dyn ChatClient> {
        Arc::new(HttpChatClient::new(&self.url, "echo-model", TIMEOUT).unwrap())
    }

    pub fn bodies(&self) -> Vec<String> {
        self.bodies.lock().unwrap().clone()
    }
}

/// Chat server that always fails with HTTP 500.
pub fn failing_upstream() -> Arc<dyn ChatClient> {
    let router = Router::new().route(
        "/v1/chat/completions",
        post(|| async { (StatusCode::INTERNAL_SERVER_ERROR, "overloaded") }),
    );
    Arc::new(HttpChatClient::new(&spawn_router(router), "m", TIMEOUT).unwrap())
}

/// In-process upstream that answers with a fixed reply.
pub struct Fixed(pub String);

impl ChatClient for Fixed {
    fn complete(&self, _: &[ChatMessage]) -> veilgate_core::Result<String> {
        Ok(self.0.clone())
    }
}

pub fn sentence_rules() -> RuleSet {
    RuleSet {
        gazetteer: BTreeMap::from([
            (EntityLabel::Person, vec!["John Doe".to_string()]),
            (EntityLabel::Location, vec!["London".to_string()]),
        ]),
        rules: BTreeMap::new(),
    }
}

pub fn sentence_detector() -> Box<dyn Detector> {
    Box::new(PatternDetector::new(&sentence_rules()).unwrap())
}

pub fn config(dir: &std::path::Path) -> GatewayConfig {
    GatewayConfig {
        vault_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

/// A gateway served over HTTP on an ephemeral port.
pub struct TestServer {
    pub base: String,
    pub gateway: Arc<Gateway>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl TestServer {
    pub fn start(gateway: Gateway) -> Self {
        let gateway = Arc::new(gateway);
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
        let served = gateway.clone();
        let thread = std::thread::spawn(move || {
            runtime().block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                veilgate::server::serve(listener, served, async {
                    let _ = stop_rx.await;
                })
                .await
            })
        });
        TestServer {
            base: format!("http://{}", addr_rx.recv().unwrap()),
            gateway,
            stop: Some(stop_tx),
            thread: Some(thread),
        }
    }

    /// Shuts the server down gracefully and waits for the final flush.
    pub fn stop(mut self) -> std::io::Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(thread) => thread.join().unwrap(),
            None => Ok(()),
        }
    }

    pub fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let response = http().post(format!("{}{path}", self.base)).json(&body).send().unwrap();
        read(response)
    }

    pub fn post_raw(&self, path: &str, body: &str) -> (u16, Value) {
        let response = http()
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body.to_string())
            .send()
            .unwrap();
        read(response)
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        read(http().get(format!("{}{path}", self.base)).send().unwrap())
    }

    pub fn create_session(&self) -> String {
        let (status, body) = self.post("/v1/sessions", json!({}));
        assert_eq!(status, 201, "{body}");
        body["id"].as_str().unwrap().to_string()
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}

fn http() -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder().timeout(TIMEOUT).build().unwrap()
}

fn read(response: reqwest::blocking::Response) -> (u16, Value) {
    let status = response.status().as_u16();
    let text = response.text().unwrap();
    let body = serde_json::from_str(&text).unwrap_or(Value::String(text));
    (status, body)
}
