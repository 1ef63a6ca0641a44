//! Offline detector backed by a gazetteer and per-label regular expressions.

use std::collections::BTreeMap;
use std::path::Path;

use aho_corasick::{AhoCorasick, MatchKind};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{resolve_overlaps, Detection, Detector};
use crate::error::{Error, Result};
use crate::label::EntityLabel;
use crate::mention::{EntityMention, Source, Span};

/// Gazetteer and rule file contents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    #[serde(default)]
    pub gazetteer: BTreeMap<EntityLabel, Vec<String>>,
    #[serde(default)]
    pub rules: BTreeMap<EntityLabel, String>,
}

impl RuleSet {
    pub fn from_json(raw: &str) -> Result<Self> {
        Ok(serde_json::from_str(raw)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
        Self::from_json(&raw)
    }
}

#[derive(Debug, Clone)]
pub struct PatternDetector {
    automaton: Option<AhoCorasick>,
    /// Label of each automaton pattern, by pattern id.
    surface_labels: Vec<EntityLabel>,
    rules: Vec<(EntityLabel, Regex)>,
}

impl PatternDetector {
    pub fn new(rule_set: &RuleSet) -> Result<Self> {
        let mut surfaces = Vec::new();
        let mut surface_labels = Vec::new();
        for (label, entries) in &rule_set.gazetteer {
            for surface in entries {
                if surface.is_empty() {
                    return Err(Error::InvalidGazetteer {
                        label: label.to_string(),
                        message: "empty surface".into(),
                    });
                }
                surfaces.push(surface.as_str());
                surface_labels.push(*label);
            }
        }
        let automaton = if surfaces.is_empty() {
            None
        } else {
            Some(
                AhoCorasick::builder()
                    .match_kind(MatchKind::LeftmostLongest)
                    .build(&surfaces)
                    .map_err(|e| Error::InvalidGazetteer {
                        label: "*".into(),
                        message: e.to_string(),
                    })?,
            )
        };

        let rules = rule_set
            .rules
            .iter()
            .map(|(label, pattern)| {
                Regex::new(pattern)
                    .map(|re| (*label, re))
                    .map_err(|e| Error::InvalidRule {
                        label: label.to_string(),
                        message: e.to_string(),
                    })
            })
            .collect::<Result<_>>()?;

        Ok(PatternDetector {
            automaton,
            surface_labels,
            rules,
        })
    }

    pub fn find(&self, text: &str) -> Vec<EntityMention> {
        let mut found = Vec::new();
        if let Some(automaton) = &self.automaton {
            for hit in automaton.find_iter(text) {
                let label = self.surface_labels[hit.pattern().as_usize()];
                push_candidate(&mut found, text, hit.range().into(), label);
            }
        }
        for (label, re) in &self.rules {
            for hit in re.find_iter(text) {
                push_candidate(&mut found, text, hit.range().into(), *label);
            }
        }
        resolve_overlaps(found)
    }
}

fn push_candidate(out: &mut Vec<EntityMention>, text: &str, span: Span, label: EntityLabel) {
    // zero-width regex hits and placeholder-bearing matches are not mentions
    if let Ok(m) = EntityMention::from_span(text, span, label, Source::Pattern) {
        out.push(m);
    }
}

impl Detector for PatternDetector {
    fn name(&self) -> &str {
        "pattern"
    }

    fn detect(&self, text: &str) -> Result<Detection> {
        Ok(Detection::from_mentions(self.find(text)))
    }
}

/// One-shot form of [`PatternDetector`].
pub fn detect_pattern(
    text: &str,
    gazetteer: &BTreeMap<EntityLabel, Vec<String>>,
    rules: &BTreeMap<EntityLabel, String>,
) -> Result<Vec<EntityMention>> {
    let detector = PatternDetector::new(&RuleSet {
        gazetteer: gazetteer.clone(),
        rules: rules.clone(),
    })?;
    Ok(detector.find(text))
}
