use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::counts::{match_entities, match_keyed, precision_recall_f1, MatchCounts};
use super::report::{EvalReport, RecordOutcome, RecordSimilarity, SimilarityMeans, Skip};
use super::similarity::{semantic_similarity, EmbeddingProvider, TokenFrequency};
use super::strsim::{jaro_winkler, normalized_levenshtein};
use crate::chat::{ChatClient, ChatMessage};
use crate::detection::{drop_placeholder_overlaps, locate_spans, resolve_overlaps, Detector};
use crate::error::{Error, Result};
use crate::masking::{mask, unmask, Vault};
use crate::mention::{EntityMention, Source, Span};
use crate::synthgen::{GoldEntity, Manifest, SyntheticRecord};

/// What a detector reported for one record.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prediction {
    /// Distinct `(surface, label)` pairs, scored against gold.
    pub entities: Vec<GoldEntity>,
    /// Localized, disjoint mentions used for masking.
    pub mentions: Vec<EntityMention>,
}

impl Prediction {
    pub fn from_mentions(mentions: Vec<EntityMention>) -> Self {
        let mut entities = Vec::new();
        for m in &mentions {
            push_distinct(
                &mut entities,
                GoldEntity {
                    surface: m.surface.clone(),
                    label: m.label,
                },
            );
        }
        Prediction { entities, mentions }
    }

    /// Locates every occurrence of each pair in `text`.
    pub fn from_entities(text: &str, entities: Vec<GoldEntity>) -> Self {
        let mut distinct = Vec::new();
        for e in entities {
            push_distinct(&mut distinct, e);
        }
        let mentions = localize(text, &distinct, Source::Manual);
        Prediction {
            entities: distinct,
            mentions,
        }
    }
}

fn push_distinct(list: &mut Vec<GoldEntity>, entity: GoldEntity) {
    if !list.contains(&entity) {
        list.push(entity);
    }
}

fn localize(text: &str, entities: &[GoldEntity], source: Source) -> Vec<EntityMention> {
    let mut mentions = Vec::new();
    for e in entities {
        for range in locate_spans(text, &e.surface) {
            if let Ok(m) = EntityMention::from_span(text, Span::from(range), e.label, source) {
                mentions.push(m);
            }
        }
    }
    drop_placeholder_overlaps(text, resolve_overlaps(mentions))
}

/// Detector as seen by the evaluation loop: it gets the whole record.
pub trait RecordDetector: Send + Sync {
    fn name(&self) -> &str;
    fn predict(&self, record: &SyntheticRecord) -> Result<Prediction>;
}

/// Wraps a text detector so it can be evaluated.
pub struct LiveDetector<D> {
    name: String,
    inner: D,
}

impl<D: Detector> LiveDetector<D> {
    pub fn new(name: impl Into<String>, inner: D) -> Self {
        LiveDetector {
            name: name.into(),
            inner,
        }
    }
}

impl<D: Detector> RecordDetector for LiveDetector<D> {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict(&self, record: &SyntheticRecord) -> Result<Prediction> {
        Ok(Prediction::from_mentions(self.inner.detect(&record.prompt)?.mentions))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScriptLine {
    id: String,
    entities: Vec<GoldEntity>,
}

/// Replays fixed answers: either each record's own gold or a JSONL script of
/// `{"id": ..., "entities": [{"surface": ..., "label": ...}]}` lines.
#[derive(Debug, Clone)]
pub struct ScriptedDetector {
    name: String,
    script: Option<HashMap<String, Vec<GoldEntity>>>,
}

impl ScriptedDetector {
    pub fn gold(name: impl Into<String>) -> Self {
        ScriptedDetector {
            name: name.into(),
            script: None,
        }
    }

    pub fn from_map(name: impl Into<String>, script: HashMap<String, Vec<GoldEntity>>) -> Self {
        ScriptedDetector {
            name: name.into(),
            script: Some(script),
        }
    }

    pub fn from_jsonl(name: impl Into<String>, raw: &str) -> Result<Self> {
        let mut script = HashMap::new();
        for (i, line) in raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: ScriptLine = serde_json::from_str(line)
                .map_err(|e| Error::InvalidDataset(format!("script line {}: {e}", i + 1)))?;
            script.insert(parsed.id, parsed.entities);
        }
        Ok(Self::from_map(name, script))
    }

    pub fn to_jsonl(script: &BTreeMap<String, Vec<GoldEntity>>) -> String {
        let mut out = String::new();
        for (id, entities) in script {
            let line = ScriptLine {
                id: id.clone(),
                entities: entities.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("script line serializes"));
            out.push('\n');
        }
        out
    }
}

impl RecordDetector for ScriptedDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict(&self, record: &SyntheticRecord) -> Result<Prediction> {
        let entities = match &self.script {
            None => record.gold.clone(),
            Some(script) => script
                .get(&record.id)
                .cloned()
                .ok_or_else(|| Error::InvalidDataset(format!("script has no entry for {}", record.id)))?,
        };
        Ok(Prediction::from_entities(&record.prompt, entities))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Distinct `(surface, label)` pairs.
    #[default]
    Surface,
    /// Every occurrence, keyed by byte span and label.
    Span,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub source: Option<String>,
    pub manifest: Option<Manifest>,
}

#[derive(Default)]
pub struct EvalOptions<'a> {
    pub matching: MatchMode,
    pub dataset: DatasetRef,
    /// Used for cosine similarity; defaults to [`TokenFrequency`].
    pub embeddings: Option<&'a dyn EmbeddingProvider>,
}

/// Scores `detector` on `records`, optionally measuring how much the
/// mask/unmask round trip through `upstream` changes its answers.
///
/// Each record gets a fresh vault. Records whose detection, masking or
/// upstream call fails are listed in `skipped` and left out of every total.
pub fn run_evaluation(
    records: &[SyntheticRecord],
    detector: &dyn RecordDetector,
    upstream: Option<&dyn ChatClient>,
    options: &EvalOptions<'_>,
) -> EvalReport {
    let fallback = TokenFrequency;
    let embeddings = options.embeddings.unwrap_or(&fallback);
    let mut counts = MatchCounts::default();
    let mut outcomes = Vec::new();
    let mut skipped = Vec::new();
    for record in records {
        match evaluate_record(record, detector, upstream, embeddings, options.matching) {
            Ok(outcome) => {
                counts += &outcome.counts;
                outcomes.push(outcome);
            }
            Err(e) => {
                tracing::warn!(record = %record.id, error = %e, "record skipped");
                skipped.push(Skip {
                    id: record.id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }

    let similarity = upstream.map(|_| {
        let values: Vec<&RecordSimilarity> = outcomes.iter().filter_map(|o| o.similarity.as_ref()).collect();
        let mean = |f: fn(&RecordSimilarity) -> f64| {
            if values.is_empty() {
                0.0
            } else {
                values.iter().map(|v| f(v)).sum::<f64>() / values.len() as f64
            }
        };
        SimilarityMeans {
            cosine: mean(|v| v.cosine),
            jaro_winkler: mean(|v| v.jaro_winkler),
            levenshtein: mean(|v| v.levenshtein),
            records: values.len(),
            degenerate_cosine: values.iter().filter(|v| v.cosine_degenerate).count(),
            embedding: embeddings.name().to_string(),
        }
    });

    EvalReport {
        detector: detector.name().to_string(),
        dataset: options.dataset.clone(),
        matching: options.matching,
        overall: precision_recall_f1(counts.overall),
        per_label: counts.per_label.iter().map(|(l, c)| (*l, precision_recall_f1(*c))).collect(),
        counts,
        similarity,
        records: outcomes,
        skipped,
    }
}

fn evaluate_record(
    record: &SyntheticRecord,
    detector: &dyn RecordDetector,
    upstream: Option<&dyn ChatClient>,
    embeddings: &dyn EmbeddingProvider,
    matching: MatchMode,
) -> Result<RecordOutcome> {
    let prediction = detector.predict(record)?;
    let mut vault = Vault::new(record.id.clone());
    let masked = mask(&record.prompt, &prediction.mentions, &mut vault)?;

    let counts = match matching {
        MatchMode::Surface => match_entities(&record.gold, &prediction.entities),
        MatchMode::Span => {
            let gold = localize(&record.prompt, &record.gold, Source::Manual);
            let key = |m: &EntityMention| ((m.span.start, m.span.end, m.label), m.label);
            match_keyed(gold.iter().map(key), prediction.mentions.iter().map(key))
        }
    };

    let mut unresolved = Vec::new();
    let similarity = match upstream {
        None => None,
        Some(client) => {
            let baseline = client.complete(&[ChatMessage::user(record.prompt.clone())])?;
            let reply = client.complete(&[ChatMessage::user(masked.masked_text.clone())])?;
            let restored = unmask(&reply, &vault);
            unresolved = restored.unresolved;
            let cosine = semantic_similarity(&baseline, &restored.text, embeddings)?;
            Some(RecordSimilarity {
                cosine: cosine.value,
                cosine_degenerate: cosine.degenerate,
                jaro_winkler: jaro_winkler(&baseline, &restored.text),
                levenshtein: normalized_levenshtein(&baseline, &restored.text),
            })
        }
    };

    Ok(RecordOutcome {
        id: record.id.clone(),
        counts,
        masked_mentions: masked.applied.len(),
        similarity,
        unresolved,
    })
}
