//! Placeholder substitution and restoration.

mod vault;

use serde::{Deserialize, Serialize};

pub use vault::{format_placeholder, Vault, VaultEntry, VaultFile};
pub(crate) use vault::write_atomic;

use crate::error::{Error, Result};
use crate::mention::{EntityMention, Span, PLACEHOLDER_TOKEN};

/// A mention and the placeholder that replaced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedMask {
    pub mention: EntityMention,
    pub placeholder: String,
    /// Where the placeholder sits in the masked text.
    pub masked_span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskResult {
    pub masked_text: String,
    pub applied: Vec<AppliedMask>,
    pub vault_delta: Vec<VaultEntry>,
    /// Replaced surfaces that still occur elsewhere in the masked text.
    pub warnings: Vec<String>,
}

impl MaskResult {
    /// Rebuilds the original text by undoing `applied` right to left.
    pub fn restore(&self) -> String {
        let mut text = self.masked_text.clone();
        for applied in self.applied.iter().rev() {
            text.replace_range(applied.masked_span.range(), &applied.mention.surface);
        }
        text
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmaskResult {
    pub text: String,
    /// Placeholder-shaped tokens with no vault binding, in order of appearance.
    pub unresolved: Vec<String>,
}

/// Replaces each mention with its placeholder, extending `vault`.
///
/// `mentions` must be sorted, pairwise disjoint and describe `text`
/// byte-exactly; nothing is written to the vault unless they are.
pub fn mask(text: &str, mentions: &[EntityMention], vault: &mut Vault) -> Result<MaskResult> {
    let mut previous_end = 0;
    for mention in mentions {
        mention.validate(text)?;
        if mention.span.start < previous_end {
            return Err(Error::OverlapViolation {
                start: mention.span.start,
                end: mention.span.end,
            });
        }
        previous_end = mention.span.end;
    }

    let mut masked = String::with_capacity(text.len());
    let mut applied = Vec::with_capacity(mentions.len());
    let mut vault_delta = Vec::new();
    let mut cursor = 0;
    for mention in mentions {
        masked.push_str(&text[cursor..mention.span.start]);
        let (placeholder, minted) = vault.placeholder_for(&mention.surface, mention.label);
        if minted {
            vault_delta.push(VaultEntry {
                placeholder: placeholder.clone(),
                surface: mention.surface.clone(),
                label: mention.label,
            });
        }
        let start = masked.len();
        masked.push_str(&placeholder);
        applied.push(AppliedMask {
            mention: mention.clone(),
            placeholder,
            masked_span: Span::new(start, masked.len()),
        });
        cursor = mention.span.end;
    }
    masked.push_str(&text[cursor..]);

    let mut warnings = Vec::new();
    let mut reported: Vec<&str> = Vec::new();
    for a in &applied {
        let surface = a.mention.surface.as_str();
        if !reported.contains(&surface) && masked.contains(surface) {
            reported.push(surface);
            warnings.push(format!(
                "{:?} ({}) still occurs outside the masked spans",
                surface, a.mention.label
            ));
        }
    }

    Ok(MaskResult {
        masked_text: masked,
        applied,
        vault_delta,
        warnings,
    })
}

/// Restores every placeholder that `vault` knows about, in a single pass.
pub fn unmask(text: &str, vault: &Vault) -> UnmaskResult {
    let mut unresolved = Vec::new();
    let restored = PLACEHOLDER_TOKEN.replace_all(text, |caps: &regex::Captures<'_>| {
        let token = &caps[0];
        match vault.lookup(token) {
            Some((surface, _)) => surface.to_string(),
            None => {
                unresolved.push(token.to_string());
                token.to_string()
            }
        }
    });
    UnmaskResult {
        text: restored.into_owned(),
        unresolved,
    }
}
