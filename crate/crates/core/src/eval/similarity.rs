use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Cosine of the angle between `u` and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cosine {
    pub value: f64,
    /// One of the vectors was all zeros; `value` is then defined as 0.
    pub degenerate: bool,
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<Cosine> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|b| b * b).sum();
    if uu == 0.0 || vv == 0.0 {
        return Ok(Cosine {
            value: 0.0,
            degenerate: true,
        });
    }
    // A single square root keeps cos(u, u) at exactly 1 for integer counts.
    let value = (dot / (uu * vv).sqrt()).clamp(-1.0, 1.0);
    Ok(Cosine {
        value,
        degenerate: false,
    })
}

/// Turns text pairs into comparable vectors.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn embed_pair(&self, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// Lowercased alphanumeric token counts over the vocabulary of the pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenFrequency;

pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl EmbeddingProvider for TokenFrequency {
    fn name(&self) -> &str {
        "token-frequency"
    }

    fn embed_pair(&self, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut vocab: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for t in tokens(a) {
            vocab.entry(t).or_default().0 += 1.0;
        }
        for t in tokens(b) {
            vocab.entry(t).or_default().1 += 1.0;
        }
        Ok(vocab.into_values().unzip())
    }
}

/// Client for an OpenAI-style `POST <base>/v1/embeddings` endpoint.
#[derive(Debug, Clone)]
pub struct HttpEmbeddings {
    endpoint: String,
    model: String,
    http: reqwest::blocking::Client,
}

impl HttpEmbeddings {
    pub fn new(base_url: &str, model: impl Into<String>, timeout: Duration) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::upstream(format!("building HTTP client: {e}")))?;
        Ok(HttpEmbeddings {
            endpoint: format!("{}/v1/embeddings", base_url.trim_end_matches('/')),
            model: model.into(),
            http,
        })
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let body = serde_json::json!({ "model": self.model, "input": [text] });
        let response = self
            .http
            .post(&self.endpoint)
            .json(&body)
            .send()
            .map_err(|e| Error::upstream(format!("POST {}: {e}", self.endpoint)))?;
        let status = response.status();
        let raw = response
            .text()
            .map_err(|e| Error::upstream(format!("reading response body: {e}")))?;
        if !status.is_success() {
            return Err(Error::UpstreamUnavailable {
                message: format!("embedding service returned HTTP {status}"),
                raw: Some(raw),
            });
        }
        let protocol = |message: &str| Error::ProtocolError {
            message: message.to_string(),
            raw: Some(raw.clone()),
        };
        let envelope: Value = serde_json::from_str(&raw).map_err(|_| protocol("response is not JSON"))?;
        let values = envelope
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| protocol("missing data[0].embedding"))?;
        values
            .iter()
            .map(|v| v.as_f64().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| protocol("embedding has a non-numeric component"))
    }
}

impl EmbeddingProvider for HttpEmbeddings {
    fn name(&self) -> &str {
        &self.model
    }

    fn embed_pair(&self, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.embed(a)?, self.embed(b)?))
    }
}

pub fn semantic_similarity(a: &str, b: &str, provider: &dyn EmbeddingProvider) -> Result<Cosine> {
    let (u, v) = provider.embed_pair(a, b)?;
    cosine_similarity(&u, &v)
}
