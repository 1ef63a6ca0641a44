use super::{locate_spans, parse_entity_reply, resolve_overlaps, Detection, Detector};
use crate::chat::{ChatClient, ChatMessage};
use crate::error::{Error, Result};
use crate::label::{canonical_label, UnknownLabelPolicy};
use crate::mention::{contains_placeholder, EntityMention, Source};

/// One-shot NER system prompt sent ahead of every text.
pub const NER_SYSTEM_PROMPT: &str = include_str!("ner_system_prompt.txt");

/// Detector that asks a chat model for `(surface, label)` pairs and finds
/// them in the text itself.
pub struct LlmDetector<C> {
    client: C,
    system_prompt: String,
    unknown_labels: UnknownLabelPolicy,
}

impl<C: ChatClient> LlmDetector<C> {
    pub fn new(client: C) -> Self {
        LlmDetector {
            client,
            system_prompt: NER_SYSTEM_PROMPT.to_string(),
            unknown_labels: UnknownLabelPolicy::Reject,
        }
    }

    pub fn with_system_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.system_prompt = prompt.into();
        self
    }

    pub fn with_unknown_labels(mut self, policy: UnknownLabelPolicy) -> Self {
        self.unknown_labels = policy;
        self
    }
}

impl<C: ChatClient> Detector for LlmDetector<C> {
    fn name(&self) -> &str {
        "llm"
    }

    fn detect(&self, text: &str) -> Result<Detection> {
        detect_llm(text, &self.client, &self.system_prompt, self.unknown_labels)
    }
}

pub fn detect_llm(
    text: &str,
    llm: &dyn ChatClient,
    system_prompt: &str,
    unknown_labels: UnknownLabelPolicy,
) -> Result<Detection> {
    let messages = [ChatMessage::system(system_prompt), ChatMessage::user(text)];
    let reply = llm.complete(&messages)?;
    let parsed = parse_entity_reply(&reply)?;

    let mut warnings = Vec::new();
    let mut found = Vec::new();
    for (surface, spelling) in parsed.pairs {
        let label = match canonical_label(&spelling) {
            Ok(label) => label,
            Err(err) => match unknown_labels {
                UnknownLabelPolicy::Reject => {
                    return Err(Error::MalformedReply {
                        message: err.to_string(),
                        raw: reply,
                    })
                }
                UnknownLabelPolicy::Drop => {
                    warnings.push(format!("dropped {surface:?}: {err}"));
                    continue;
                }
            },
        };
        if surface.is_empty() || contains_placeholder(&surface) {
            warnings.push(format!("dropped unusable surface {surface:?}"));
            continue;
        }
        let spans = locate_spans(text, &surface);
        if spans.is_empty() {
            warnings.push(format!("surface {surface:?} ({label}) not found in text"));
            continue;
        }
        for span in spans {
            found.push(EntityMention::from_span(text, span.into(), label, Source::Llm)?);
        }
    }
    Ok(Detection {
        mentions: resolve_overlaps(found),
        warnings,
    })
}
