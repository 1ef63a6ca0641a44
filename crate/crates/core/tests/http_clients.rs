use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use veilgate_core::chat::{ChatClient, ChatMessage, HttpChatClient};
use veilgate_core::detection::{
    Detector, DetectorMode, DetectorSettings, LlmDetector, LlmDetectorSettings, NerServiceDetector, NER_SYSTEM_PROMPT,
};
use veilgate_core::eval::{run_evaluation, semantic_similarity, EvalOptions, HttpEmbeddings, ScriptedDetector};
use veilgate_core::synthgen::{build_dataset, FakeTextSource};
use veilgate_core::{EntityLabel, Error, Source};

const TIMEOUT: Duration = Duration::from_secs(10);
const SENTENCE: &str = "My name is John Doe and I live in London.";

type Log = Arc<Mutex<Vec<Value>>>;

/// Serves `router` on an ephemeral port from a background thread.
fn spawn(router: Router) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(1)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
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

/// Chat server answering every request with `content`, logging request bodies.
fn chat_stub(content: &'static str) -> (String, Log) {
    let log: Log = Arc::default();
    let seen = log.clone();
    let router = Router::new().route(
        "/v1/chat/completions",
        post(move |Json(body): Json<Value>| {
            let seen = seen.clone();
            async move {
                seen.lock().unwrap().push(body);
                Json(envelope(content))
            }
        }),
    );
    (spawn(router), log)
}

/// Chat server that answers with the last user message.
fn echo_stub() -> String {
    let router = Router::new().route(
        "/v1/chat/completions",
        post(|Json(body): Json<Value>| async move {
            let last = body["messages"].as_array().unwrap().last().unwrap()["content"]
                .as_str()
                .unwrap()
                .to_string();
            Json(envelope(&last))
        }),
    );
    spawn(router)
}

#[test]
fn chat_client_sends_wire_format_and_reads_content() {
    let (url, log) = chat_stub("fixed body");
    let client = HttpChatClient::new(&url, "qwen", TIMEOUT).unwrap().with_temperature(0.2);
    let reply = client
        .complete(&[ChatMessage::system("sys"), ChatMessage::user("hello")])
        .unwrap();
    assert_eq!(reply, "fixed body");
    let body = &log.lock().unwrap()[0];
    assert_eq!(body["model"], "qwen");
    assert_eq!(body["temperature"], 0.2);
    assert_eq!(
        body["messages"],
        json!([{ "role": "system", "content": "sys" }, { "role": "user", "content": "hello" }])
    );
}

#[test]
fn chat_client_http_500_is_upstream_unavailable() {
    let router = Router::new().route(
        "/v1/chat/completions",
        post(|| async { (StatusCode::INTERNAL_SERVER_ERROR, "model crashed") }),
    );
    let client = HttpChatClient::new(&spawn(router), "m", TIMEOUT).unwrap();
    match client.complete(&[ChatMessage::user("x")]) {
        Err(Error::UpstreamUnavailable { raw, .. }) => assert_eq!(raw.as_deref(), Some("model crashed")),
        other => panic!("expected UpstreamUnavailable, got {other:?}"),
    }
}

#[test]
fn chat_client_missing_content_is_protocol_error() {
    let router = Router::new().route(
        "/v1/chat/completions",
        post(|| async { Json(json!({ "choices": [{ "message": {} }] })) }),
    );
    let client = HttpChatClient::new(&spawn(router), "m", TIMEOUT).unwrap();
    assert!(matches!(
        client.complete(&[ChatMessage::user("x")]),
        Err(Error::ProtocolError { .. })
    ));

    let router = Router::new().route("/v1/chat/completions", post(|| async { "not json" }));
    let client = HttpChatClient::new(&spawn(router), "m", TIMEOUT).unwrap();
    assert!(matches!(
        client.complete(&[ChatMessage::user("x")]),
        Err(Error::ProtocolError { .. })
    ));
}

#[test]
fn chat_client_connection_refused_is_upstream_unavailable() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let client = HttpChatClient::new(&format!("http://127.0.0.1:{port}"), "m", TIMEOUT).unwrap();
    assert!(matches!(
        client.complete(&[ChatMessage::user("x")]),
        Err(Error::UpstreamUnavailable { .. })
    ));
}

#[test]
fn llm_detector_over_http() {
    let (url, log) = chat_stub("Sure!\n```json\n{\"entities\": [{\"John Doe\": \"person\"}, {\"London\": \"location\"}]}\n```");
    let detector = LlmDetector::new(HttpChatClient::new(&url, "qwen", TIMEOUT).unwrap());
    let detection = detector.detect(SENTENCE).unwrap();
    let found: Vec<_> = detection
        .mentions
        .iter()
        .map(|m| (m.surface.as_str(), m.label, m.span.start, m.span.end, m.source))
        .collect();
    assert_eq!(
        found,
        [
            ("John Doe", EntityLabel::Person, 11, 19, Source::Llm),
            ("London", EntityLabel::Location, 34, 40, Source::Llm),
        ]
    );
    let body = &log.lock().unwrap()[0];
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][0]["content"], NER_SYSTEM_PROMPT);
    assert_eq!(body["messages"][1]["content"], SENTENCE);
}

#[test]
fn llm_detector_garbage_reply_is_malformed() {
    let (url, _) = chat_stub("I cannot help with that.");
    let detector = LlmDetector::new(HttpChatClient::new(&url, "qwen", TIMEOUT).unwrap());
    assert!(matches!(detector.detect(SENTENCE), Err(Error::MalformedReply { .. })));
}

fn ner_stub(response: Value) -> (String, Log) {
    let log: Log = Arc::default();
    let seen = log.clone();
    let router = Router::new().route(
        "/ner",
        post(move |Json(body): Json<Value>| {
            let seen = seen.clone();
            let response = response.clone();
            async move {
                seen.lock().unwrap().push(body);
                Json(response)
            }
        }),
    );
    (format!("{}/ner", spawn(router)), log)
}

#[test]
fn ner_service_detector_over_http() {
    let (url, log) = ner_stub(json!({ "entities": [
        { "text": "London", "label": "location", "start": 34, "end": 40 },
        { "text": "John Doe", "label": "person", "start": 11, "end": 19 }
    ]}));
    let detector = NerServiceDetector::new(url, TIMEOUT).unwrap();
    let mentions = detector.detect(SENTENCE).unwrap().mentions;
    assert_eq!(mentions.len(), 2);
    assert_eq!(mentions[0].surface, "John Doe");
    assert_eq!(mentions[0].source, Source::NerService);
    let body = &log.lock().unwrap()[0];
    assert_eq!(body["text"], SENTENCE);
    let labels: Vec<&str> = body["labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(labels.contains(&"tax ID") && labels.contains(&"law office"));
    assert!(body.get("threshold").is_none());
}

#[test]
fn ner_threshold_is_passed_through() {
    let (url, log) = ner_stub(json!({ "entities": [] }));
    let settings = DetectorSettings {
        mode: DetectorMode::NerService,
        ner_service_url: Some(url),
        ner_threshold: Some(0.35),
        ..Default::default()
    };
    assert!(settings.build(TIMEOUT).unwrap().detect(SENTENCE).unwrap().mentions.is_empty());
    assert_eq!(log.lock().unwrap()[0]["threshold"], 0.35);
}

#[test]
fn ner_service_bad_span_is_rejected() {
    let (url, _) = ner_stub(json!({ "entities": [
        { "text": "John Doe", "label": "person", "start": 10, "end": 18 }
    ]}));
    let detector = NerServiceDetector::new(url, TIMEOUT).unwrap();
    assert!(matches!(detector.detect(SENTENCE), Err(Error::SpanMismatch { .. })));
}

#[test]
fn ner_service_errors() {
    let router = Router::new().route("/ner", post(|| async { StatusCode::SERVICE_UNAVAILABLE }));
    let detector = NerServiceDetector::new(format!("{}/ner", spawn(router)), TIMEOUT).unwrap();
    assert!(matches!(detector.detect(SENTENCE), Err(Error::UpstreamUnavailable { .. })));

    let (url, _) = ner_stub(json!({ "spans": [] }));
    let detector = NerServiceDetector::new(url, TIMEOUT).unwrap();
    assert!(matches!(detector.detect(SENTENCE), Err(Error::MalformedReply { .. })));
}

#[test]
fn hybrid_settings_merge_all_backends() {
    // The NER service sees the person, the LLM the same person and the city;
    // the bundled pattern rules see nothing here.
    let (ner_url, _) = ner_stub(json!({ "entities": [
        { "text": "John Doe", "label": "person", "start": 11, "end": 19 }
    ]}));
    let (llm_url, _) = chat_stub("{\"entities\": [{\"John Doe\": \"person\"}, {\"London\": \"location\"}]}");
    let settings = DetectorSettings {
        mode: DetectorMode::Hybrid,
        ner_service_url: Some(ner_url),
        llm: Some(LlmDetectorSettings {
            url: llm_url,
            model: "qwen".into(),
            temperature: None,
            system_prompt: None,
        }),
        ..Default::default()
    };
    let detector = settings.build(TIMEOUT).unwrap();
    assert_eq!(detector.name(), "ner-service+llm+pattern");
    let mentions = detector.detect(SENTENCE).unwrap().mentions;
    let found: Vec<_> = mentions.iter().map(|m| (m.surface.as_str(), m.source)).collect();
    assert_eq!(found, [("John Doe", Source::NerService), ("London", Source::Llm)]);
}

#[test]
fn http_embeddings_provider() {
    // Embeds a text as (length, 1): cosine of equal-length texts is 1.
    let router = Router::new().route(
        "/v1/embeddings",
        post(|Json(body): Json<Value>| async move {
            let text = body["input"][0].as_str().unwrap().to_string();
            Json(json!({ "data": [{ "index": 0, "embedding": [text.len() as f64, 1.0] }] }))
        }),
    );
    let provider = HttpEmbeddings::new(&spawn(router), "mini", TIMEOUT).unwrap();
    let same = semantic_similarity("abc", "xyz", &provider).unwrap();
    assert!((same.value - 1.0).abs() < 1e-12);
    let different = semantic_similarity("a", "abcdefgh", &provider).unwrap();
    assert!(different.value < 1.0);

    let router = Router::new().route("/v1/embeddings", post(|| async { Json(json!({ "data": [] })) }));
    let provider = HttpEmbeddings::new(&spawn(router), "mini", TIMEOUT).unwrap();
    assert!(matches!(
        semantic_similarity("a", "b", &provider),
        Err(Error::ProtocolError { .. })
    ));
}

#[test]
fn evaluation_through_http_echo_upstream() {
    let records = build_dataset(5, 7, FakeTextSource::Offline, None).unwrap().records;
    let upstream = HttpChatClient::new(&echo_stub(), "echo", TIMEOUT).unwrap();
    let report = run_evaluation(&records, &ScriptedDetector::gold("oracle"), Some(&upstream), &EvalOptions::default());
    assert!(report.skipped.is_empty());
    let sim = report.similarity.unwrap();
    assert_eq!((sim.cosine, sim.jaro_winkler, sim.levenshtein), (1.0, 1.0, 0.0));
}

#[test]
fn evaluation_records_upstream_failures_as_skips() {
    let router = Router::new().route(
        "/v1/chat/completions",
        post(|| async { (StatusCode::INTERNAL_SERVER_ERROR, "down") }),
    );
    let records = build_dataset(3, 7, FakeTextSource::Offline, None).unwrap().records;
    let upstream = HttpChatClient::new(&spawn(router), "m", TIMEOUT).unwrap();
    let report = run_evaluation(&records, &ScriptedDetector::gold("oracle"), Some(&upstream), &EvalOptions::default());
    assert_eq!(report.skipped.len(), 3);
    assert!(report.skipped[0].reason.contains("upstream unavailable"));
    assert_eq!(report.similarity.unwrap().records, 0);
}
