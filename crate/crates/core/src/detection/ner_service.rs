//! Adapter for an external span-level NER service.
//!
//! Wire format: request `{"text": str, "labels": [str]}`, response
//! `{"entities": [{"text": str, "label": str, "start": int, "end": int}]}`
//! with byte offsets into `text`. A configured score cutoff is sent as
//! `threshold`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{resolve_overlaps, Detection, Detector};
use crate::error::{Error, Result};
use crate::label::{canonical_label, EntityLabel, UnknownLabelPolicy};
use crate::mention::{EntityMention, Source, Span};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NerRequest {
    pub text: String,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerEntity {
    pub text: String,
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NerResponse {
    pub entities: Vec<NerEntity>,
}

#[derive(Debug, Clone)]
pub struct NerServiceDetector {
    endpoint: String,
    labels: Vec<EntityLabel>,
    unknown_labels: UnknownLabelPolicy,
    threshold: Option<f64>,
    http: reqwest::blocking::Client,
}

impl NerServiceDetector {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::upstream(format!("building http client: {e}")))?;
        Ok(NerServiceDetector {
            endpoint: endpoint.into(),
            labels: EntityLabel::ALL.to_vec(),
            unknown_labels: UnknownLabelPolicy::Reject,
            threshold: None,
            http,
        })
    }

    pub fn with_labels(mut self, labels: Vec<EntityLabel>) -> Self {
        self.labels = labels;
        self
    }

    pub fn with_unknown_labels(mut self, policy: UnknownLabelPolicy) -> Self {
        self.unknown_labels = policy;
        self
    }

    pub fn with_threshold(mut self, threshold: Option<f64>) -> Self {
        self.threshold = threshold;
        self
    }

    fn call(&self, text: &str) -> Result<NerResponse> {
        let request = NerRequest {
            text: text.to_string(),
            labels: self.labels.iter().map(|l| l.prompt_spelling().to_string()).collect(),
            threshold: self.threshold,
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
            .map_err(|e| Error::upstream(format!("reading NER response: {e}")))?;
        if !status.is_success() {
            return Err(Error::UpstreamUnavailable {
                message: format!("NER service returned HTTP {status}"),
                raw: Some(body),
            });
        }
        serde_json::from_str(&body).map_err(|e| Error::MalformedReply {
            message: format!("NER response: {e}"),
            raw: body,
        })
    }
}

impl Detector for NerServiceDetector {
    fn name(&self) -> &str {
        "ner-service"
    }

    fn detect(&self, text: &str) -> Result<Detection> {
        let response = self.call(text)?;
        mentions_from_response(text, response, self.unknown_labels)
    }
}

pub fn detect_ner_service(text: &str, endpoint: &str, labels: &[EntityLabel]) -> Result<Vec<EntityMention>> {
    let detector = NerServiceDetector::new(endpoint, crate::chat::DEFAULT_TIMEOUT)?.with_labels(labels.to_vec());
    Ok(detector.detect(text)?.mentions)
}

/// Validates service spans against `text` and converts them to mentions.
pub fn mentions_from_response(
    text: &str,
    response: NerResponse,
    unknown_labels: UnknownLabelPolicy,
) -> Result<Detection> {
    let mut warnings = Vec::new();
    let mut found = Vec::with_capacity(response.entities.len());
    for entity in response.entities {
        let label = match (canonical_label(&entity.label), unknown_labels) {
            (Ok(label), _) => label,
            (Err(err), UnknownLabelPolicy::Reject) => return Err(err),
            (Err(err), UnknownLabelPolicy::Drop) => {
                warnings.push(format!("dropped {:?}: {err}", entity.text));
                continue;
            }
        };
        let span = Span::new(entity.start, entity.end);
        if span.is_empty() || text.get(span.range()) != Some(entity.text.as_str()) {
            return Err(Error::SpanMismatch {
                surface: entity.text,
                start: entity.start,
                end: entity.end,
            });
        }
        match EntityMention::from_span(text, span, label, Source::NerService) {
            Ok(m) => found.push(m),
            Err(err) => warnings.push(format!("dropped {:?}: {err}", entity.text)),
        }
    }
    Ok(Detection {
        mentions: resolve_overlaps(found),
        warnings,
    })
}
