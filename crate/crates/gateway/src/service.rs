use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use veilgate_core::chat::{ChatClient, ChatMessage};
use veilgate_core::detection::{drop_placeholder_overlaps, resolve_overlaps, Detector};
use veilgate_core::masking::{mask, unmask, Vault, VaultEntry};
use veilgate_core::mention::placeholder_spans;
use veilgate_core::{EntityLabel, EntityMention, Source, Span};

use crate::config::GatewayConfig;
use crate::error::{GatewayError, Result};
use crate::session::{Exchange, PendingMask, Session, SessionStore};

/// A detected mention as shown to the reviewer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewMention {
    #[serde(flatten)]
    pub mention: EntityMention,
    pub placeholder: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskResponse {
    pub masked_text: String,
    pub mentions: Vec<ReviewMention>,
    /// Bindings dispatch would add to the vault.
    pub vault_delta: Vec<VaultEntry>,
    pub mask_hash: String,
    pub warnings: Vec<String>,
}

/// Reviewer adjustment to the proposed mentions. Spans are byte offsets
/// into the original prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Edit {
    Add { start: usize, end: usize, label: EntityLabel },
    Remove { start: usize, end: usize },
    Relabel { start: usize, end: usize, label: EntityLabel },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchRequest {
    pub mask_hash: String,
    #[serde(default)]
    pub edits: Vec<Edit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchResponse {
    pub masked_prompt: String,
    pub masked_reply: String,
    pub reply: String,
    pub unresolved: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
}

/// Hex SHA-256 of a masked prompt.
pub fn mask_hash(masked_text: &str) -> String {
    Sha256::digest(masked_text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Applies reviewer edits to `mentions`, returning a sorted disjoint list.
pub fn apply_edits(prompt: &str, mentions: &[EntityMention], edits: &[Edit]) -> Result<Vec<EntityMention>> {
    let mut current = mentions.to_vec();
    let position = |current: &[EntityMention], start: usize, end: usize| {
        current
            .iter()
            .position(|m| m.span == Span::new(start, end))
            .ok_or_else(|| GatewayError::InvalidEdit(format!("no mention at {start}..{end}")))
    };
    for edit in edits {
        match *edit {
            Edit::Remove { start, end } => {
                let i = position(&current, start, end)?;
                current.remove(i);
            }
            Edit::Relabel { start, end, label } => {
                let i = position(&current, start, end)?;
                current[i].label = label;
            }
            Edit::Add { start, end, label } => {
                let span = Span::new(start, end);
                let mention = EntityMention::from_span(prompt, span, label, Source::Manual)
                    .map_err(|e| GatewayError::InvalidEdit(e.to_string()))?;
                if let Some(other) = current.iter().find(|m| m.span.overlaps(&span)) {
                    return Err(GatewayError::InvalidEdit(format!(
                        "{start}..{end} overlaps the mention at {}..{}",
                        other.span.start, other.span.end
                    )));
                }
                if placeholder_spans(prompt).iter().any(|r| r.start < end && start < r.end) {
                    return Err(GatewayError::InvalidEdit(format!("{start}..{end} overlaps a placeholder")));
                }
                current.push(mention);
            }
        }
    }
    current.sort_by_key(|m| (m.span.start, m.span.end));
    Ok(current)
}

/// Session registry plus the detector and upstream it routes through.
pub struct Gateway {
    config: GatewayConfig,
    store: SessionStore,
    detector: Box<dyn Detector>,
    upstream: Arc<dyn ChatClient>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

fn lock<T>(mutex: &Mutex<T>) -> MutexGuard<'_, T> {
    mutex.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl Gateway {
    /// Builds detector and upstream clients from `config`. Blocking; call
    /// outside any async runtime.
    pub fn new(config: GatewayConfig) -> Result<Self> {
        config.validate()?;
        let detector = config.detector.build(config.timeout())?;
        let upstream = config.upstream()?;
        Ok(Self::with_parts(config, detector, upstream))
    }

    pub fn with_parts(config: GatewayConfig, detector: Box<dyn Detector>, upstream: Arc<dyn ChatClient>) -> Self {
        Gateway {
            store: SessionStore::new(config.vault_dir.clone()),
            config,
            detector,
            upstream,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn create_session(&self) -> Result<SessionInfo> {
        let session = self.store.create(self.config.detector.clone())?;
        let id = session.id.clone();
        lock(&self.sessions).insert(id.clone(), Arc::new(Mutex::new(session)));
        tracing::info!(session = %id, "session created");
        Ok(SessionInfo { id })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        let mut sessions = lock(&self.sessions);
        if let Some(session) = sessions.get(id) {
            return Ok(session.clone());
        }
        let session = Arc::new(Mutex::new(self.store.load(id)?));
        sessions.insert(id.to_string(), session.clone());
        Ok(session)
    }

    fn base_vault(&self, session: &Session) -> Vault {
        if self.config.reset_vault_per_prompt {
            Vault::new(session.vault.session_id())
        } else {
            session.vault.clone()
        }
    }

    /// Detects and masks `prompt` for review. Nothing leaves the process
    /// and the session vault is unchanged until dispatch.
    pub fn mask_prompt(&self, id: &str, prompt: &str) -> Result<MaskResponse> {
        let session = self.session(id)?;
        let detection = self.detector.detect(prompt)?;
        let mentions = drop_placeholder_overlaps(prompt, resolve_overlaps(detection.mentions));

        let mut session = lock(&session);
        let mut preview = self.base_vault(&session);
        let result = mask(prompt, &mentions, &mut preview)?;
        let hash = mask_hash(&result.masked_text);
        session.pending = Some(PendingMask {
            prompt: prompt.to_string(),
            mentions,
            masked_text: result.masked_text.clone(),
            mask_hash: hash.clone(),
        });

        let mut warnings = detection.warnings;
        warnings.extend(result.warnings);
        Ok(MaskResponse {
            masked_text: result.masked_text,
            mentions: result
                .applied
                .into_iter()
                .map(|a| ReviewMention {
                    mention: a.mention,
                    placeholder: a.placeholder,
                })
                .collect(),
            vault_delta: result.vault_delta,
            mask_hash: hash,
            warnings,
        })
    }

    /// Re-masks the reviewed prompt with `request.edits`, sends it upstream
    /// and restores the reply. The vault and transcript change only when
    /// the upstream call succeeds.
    pub fn dispatch(&self, id: &str, request: &DispatchRequest) -> Result<DispatchResponse> {
        let session = self.session(id)?;
        let mut session = lock(&session);
        let pending = match &session.pending {
            Some(p) if p.mask_hash == request.mask_hash => p.clone(),
            _ => return Err(GatewayError::StaleMask),
        };
        let mentions = apply_edits(&pending.prompt, &pending.mentions, &request.edits)?;
        let mut vault = self.base_vault(&session);
        let masked = mask(&pending.prompt, &mentions, &mut vault)?;

        let sent_at = Utc::now();
        let masked_reply = self.upstream.complete(&[ChatMessage::user(masked.masked_text.clone())])?;
        let received_at = Utc::now();
        let restored = unmask(&masked_reply, &vault);
        if !restored.unresolved.is_empty() {
            tracing::warn!(session = %id, unresolved = ?restored.unresolved, "reply has unknown placeholders");
        }

        session.vault = vault;
        session.pending = None;
        session.append(Exchange {
            mask_hash: mask_hash(&masked.masked_text),
            original_prompt: pending.prompt,
            masked_prompt: masked.masked_text.clone(),
            masked_reply: masked_reply.clone(),
            reply: restored.text.clone(),
            unresolved: restored.unresolved.clone(),
            sent_at,
            received_at,
        });
        self.store.persist(&session)?;
        Ok(DispatchResponse {
            masked_prompt: masked.masked_text,
            masked_reply,
            reply: restored.text,
            unresolved: restored.unresolved,
        })
    }

    pub fn vault(&self, id: &str) -> Result<Vec<VaultEntry>> {
        let session = self.session(id)?;
        let entries = lock(&session).vault.entries();
        Ok(entries)
    }

    pub fn transcript(&self, id: &str) -> Result<Vec<Exchange>> {
        let session = self.session(id)?;
        let transcript = lock(&session).transcript().to_vec();
        Ok(transcript)
    }

    /// Writes every loaded session back to disk.
    pub fn flush(&self) -> Result<()> {
        let sessions: Vec<_> = lock(&self.sessions).values().cloned().collect();
        for session in sessions {
            self.store.persist(&lock(&session))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mention(prompt: &str, surface: &str, label: EntityLabel) -> EntityMention {
        let start = prompt.find(surface).unwrap();
        EntityMention::from_span(prompt, Span::new(start, start + surface.len()), label, Source::Pattern).unwrap()
    }

    #[test]
    fn edits() {
        let prompt = "John Doe met Jane in London.";
        let base = vec![
            mention(prompt, "John Doe", EntityLabel::Person),
            mention(prompt, "London", EntityLabel::Location),
        ];
        let out = apply_edits(prompt, &base, &[Edit::Remove { start: 21, end: 27 }]).unwrap();
        assert_eq!(out.len(), 1);
        let out = apply_edits(
            prompt,
            &base,
            &[
                Edit::Add {
                    start: 13,
                    end: 17,
                    label: EntityLabel::Person,
                },
                Edit::Relabel {
                    start: 21,
                    end: 27,
                    label: EntityLabel::Address,
                },
            ],
        )
        .unwrap();
        assert_eq!(out.iter().map(|m| m.surface.as_str()).collect::<Vec<_>>(), ["John Doe", "Jane", "London"]);
        assert_eq!(out[2].label, EntityLabel::Address);
        assert_eq!(out[1].source, Source::Manual);

        let overlapping = Edit::Add {
            start: 0,
            end: 4,
            label: EntityLabel::Person,
        };
        assert!(matches!(apply_edits(prompt, &base, &[overlapping]), Err(GatewayError::InvalidEdit(_))));
        let missing = Edit::Remove { start: 1, end: 2 };
        assert!(matches!(apply_edits(prompt, &base, &[missing]), Err(GatewayError::InvalidEdit(_))));
        let out_of_bounds = Edit::Add {
            start: 20,
            end: 99,
            label: EntityLabel::Person,
        };
        assert!(apply_edits(prompt, &base, &[out_of_bounds]).is_err());
    }

    #[test]
    fn placeholder_overlap_rejected() {
        let prompt = "Ask [PERSON_1] today";
        let edit = Edit::Add {
            start: 5,
            end: 11,
            label: EntityLabel::Person,
        };
        assert!(apply_edits(prompt, &[], &[edit]).is_err());
    }

    #[test]
    fn edit_wire_format() {
        let edit: Edit = serde_json::from_str(r#"{"op":"add","start":1,"end":3,"label":"law office"}"#).unwrap();
        assert_eq!(
            edit,
            Edit::Add {
                start: 1,
                end: 3,
                label: EntityLabel::LawOffice
            }
        );
    }

    #[test]
    fn hash_is_sha256_hex() {
        assert_eq!(
            mask_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
