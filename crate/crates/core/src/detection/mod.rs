//! Entity detection backends and their merge step.

mod llm;
mod ner_service;
mod pattern;
mod reply;
mod resolve;
mod spans;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use llm::{detect_llm, LlmDetector, NER_SYSTEM_PROMPT};
pub use ner_service::{
    detect_ner_service, mentions_from_response, NerEntity, NerRequest, NerResponse, NerServiceDetector,
};
pub use pattern::{detect_pattern, PatternDetector, RuleSet};
pub use reply::{parse_entity_reply, RawLlmEntityList};
pub use resolve::resolve_overlaps;
pub use spans::locate_spans;

use crate::chat::HttpChatClient;
use crate::error::{Error, Result};
use crate::label::UnknownLabelPolicy;
use crate::mention::{placeholder_spans, EntityMention};

/// Mentions found in one text, plus non-fatal notes for the operator.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub mentions: Vec<EntityMention>,
    pub warnings: Vec<String>,
}

impl Detection {
    pub fn from_mentions(mentions: Vec<EntityMention>) -> Self {
        Detection {
            mentions,
            warnings: Vec::new(),
        }
    }
}

/// A stateless detector backend.
pub trait Detector: Send + Sync {
    fn name(&self) -> &str;
    fn detect(&self, text: &str) -> Result<Detection>;
}

impl<T: Detector + ?Sized> Detector for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn detect(&self, text: &str) -> Result<Detection> {
        (**self).detect(text)
    }
}

impl<T: Detector + ?Sized> Detector for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn detect(&self, text: &str) -> Result<Detection> {
        (**self).detect(text)
    }
}

/// Runs several backends on the same text and merges their output.
pub struct HybridDetector {
    name: String,
    backends: Vec<Box<dyn Detector>>,
}

impl HybridDetector {
    pub fn new(backends: Vec<Box<dyn Detector>>) -> Self {
        let name = backends.iter().map(|b| b.name()).collect::<Vec<_>>().join("+");
        HybridDetector { name, backends }
    }
}

impl Detector for HybridDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, text: &str) -> Result<Detection> {
        let mut merged = Detection::default();
        for backend in &self.backends {
            let Detection { mentions, warnings } = backend.detect(text)?;
            merged.mentions.extend(mentions);
            merged
                .warnings
                .extend(warnings.into_iter().map(|w| format!("{}: {w}", backend.name())));
        }
        merged.mentions = resolve_overlaps(merged.mentions);
        Ok(merged)
    }
}

/// Removes mentions that touch an existing placeholder token in `text`,
/// so re-masking already masked text never splits a placeholder.
pub fn drop_placeholder_overlaps(text: &str, mentions: Vec<EntityMention>) -> Vec<EntityMention> {
    let taken = placeholder_spans(text);
    if taken.is_empty() {
        return mentions;
    }
    mentions
        .into_iter()
        .filter(|m| taken.iter().all(|r| m.span.end <= r.start || r.end <= m.span.start))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorMode {
    #[default]
    Pattern,
    Llm,
    NerService,
    /// Every configured backend, merged by [`resolve_overlaps`].
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmDetectorSettings {
    pub url: String,
    pub model: String,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub system_prompt: Option<String>,
}

/// Declarative detector selection, shared by the gateway and the evaluator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectorSettings {
    #[serde(default)]
    pub mode: DetectorMode,
    /// Gazetteer/rule file; the bundled immigration-law rules when absent.
    #[serde(default)]
    pub rules_file: Option<PathBuf>,
    #[serde(default)]
    pub llm: Option<LlmDetectorSettings>,
    #[serde(default)]
    pub ner_service_url: Option<String>,
    /// Score cutoff passed through to the NER service; its default when absent.
    #[serde(default)]
    pub ner_threshold: Option<f64>,
    #[serde(default)]
    pub unknown_labels: UnknownLabelPolicy,
}

impl DetectorSettings {
    pub fn build(&self, timeout: Duration) -> Result<Box<dyn Detector>> {
        match self.mode {
            DetectorMode::Pattern => Ok(Box::new(self.pattern()?)),
            DetectorMode::Llm => self
                .llm(timeout)?
                .ok_or_else(|| Error::Precondition("llm detector selected but not configured".into())),
            DetectorMode::NerService => self
                .ner(timeout)?
                .ok_or_else(|| Error::Precondition("ner-service detector selected but no url configured".into())),
            DetectorMode::Hybrid => {
                let mut backends: Vec<Box<dyn Detector>> = Vec::new();
                if let Some(ner) = self.ner(timeout)? {
                    backends.push(ner);
                }
                if let Some(llm) = self.llm(timeout)? {
                    backends.push(llm);
                }
                backends.push(Box::new(self.pattern()?));
                Ok(Box::new(HybridDetector::new(backends)))
            }
        }
    }

    fn pattern(&self) -> Result<PatternDetector> {
        let rules = match &self.rules_file {
            Some(path) => RuleSet::load(path)?,
            None => crate::synthgen::default_rule_set(),
        };
        PatternDetector::new(&rules)
    }

    fn llm(&self, timeout: Duration) -> Result<Option<Box<dyn Detector>>> {
        let Some(settings) = &self.llm else {
            return Ok(None);
        };
        let mut client = HttpChatClient::new(&settings.url, settings.model.clone(), timeout)?;
        if let Some(t) = settings.temperature {
            client = client.with_temperature(t);
        }
        let mut detector = LlmDetector::new(client).with_unknown_labels(self.unknown_labels);
        if let Some(prompt) = &settings.system_prompt {
            detector = detector.with_system_prompt(prompt.clone());
        }
        Ok(Some(Box::new(detector)))
    }

    fn ner(&self, timeout: Duration) -> Result<Option<Box<dyn Detector>>> {
        let Some(url) = &self.ner_service_url else {
            return Ok(None);
        };
        Ok(Some(Box::new(
            NerServiceDetector::new(url.clone(), timeout)?
                .with_unknown_labels(self.unknown_labels)
                .with_threshold(self.ner_threshold),
        )))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::chat::{ChatClient, ChatMessage};
    use crate::label::EntityLabel;

    struct Fixed(&'static str);

    impl ChatClient for Fixed {
        fn complete(&self, _: &[ChatMessage]) -> Result<String> {
            Ok(self.0.into())
        }
    }

    #[test]
    fn hybrid_merges_same_span() {
        let rules = RuleSet {
            gazetteer: BTreeMap::from([(EntityLabel::Person, vec!["John Doe".to_string()])]),
            rules: BTreeMap::new(),
        };
        let hybrid = HybridDetector::new(vec![
            Box::new(PatternDetector::new(&rules).unwrap()),
            Box::new(LlmDetector::new(Fixed(r#"{"entities":[{"John Doe":"person"}]}"#))),
        ]);
        let out = hybrid.detect("My name is John Doe, I live in London.").unwrap();
        assert_eq!(out.mentions.len(), 1);
        assert_eq!(out.mentions[0].source, crate::mention::Source::Llm);
        assert_eq!(hybrid.name(), "pattern+llm");
    }

    #[test]
    fn placeholder_overlaps_removed() {
        let text = "Hi [PERSON_1], PERSON";
        let inside = EntityMention::from_span(text, (4..10).into(), EntityLabel::Person, crate::mention::Source::Llm)
            .unwrap();
        let outside = EntityMention::from_span(text, (15..21).into(), EntityLabel::Person, crate::mention::Source::Llm)
            .unwrap();
        assert_eq!(drop_placeholder_overlaps(text, vec![inside, outside.clone()]), vec![outside]);
    }

    #[test]
    fn mode_requires_endpoint() {
        let settings = DetectorSettings {
            mode: DetectorMode::Llm,
            ..Default::default()
        };
        assert!(settings.build(Duration::from_secs(1)).is_err());
    }
}
