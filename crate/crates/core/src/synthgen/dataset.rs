use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fabricate::{fabricate_entities, select_scenario, EntityBundle, TaskType};
use super::tables::{CITIES, LAW_OFFICES, TABLES_VERSION};
use super::templates::{generate_fake_text, render_prompt, FakeTextSource};
use crate::chat::ChatClient;
use crate::detection::resolve_overlaps;
use crate::error::{Error, Result};
use crate::label::EntityLabel;
use crate::masking::write_atomic;
use crate::mention::{EntityMention, Source, Span};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoldEntity {
    pub surface: String,
    pub label: EntityLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    pub id: String,
    pub task_type: TaskType,
    pub practice_area: String,
    pub subfield: String,
    pub prompt: String,
    pub gold: Vec<GoldEntity>,
    pub fake_text_source: FakeTextSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub n: usize,
    pub mode: FakeTextSource,
    pub tables_version: String,
    pub records: usize,
    pub entities: usize,
    pub per_label: BTreeMap<EntityLabel, usize>,
    pub task_types: BTreeMap<TaskType, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub records: Vec<SyntheticRecord>,
    pub manifest: Manifest,
}

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

impl Dataset {
    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.records)
    }

    /// Writes `dataset.jsonl` and `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::storage(dir, e))?;
        write_atomic(&dir.join(DATASET_FILE), self.to_jsonl().as_bytes())?;
        let manifest = serde_json::to_string_pretty(&self.manifest)? + "\n";
        write_atomic(&dir.join(MANIFEST_FILE), manifest.as_bytes())
    }
}

pub fn to_jsonl(records: &[SyntheticRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl(path: &Path) -> Result<Vec<SyntheticRecord>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
    parse_jsonl(&raw)
}

pub fn parse_jsonl(raw: &str) -> Result<Vec<SyntheticRecord>> {
    raw.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| Error::InvalidDataset(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Candidate `(surface, label)` pairs that gold scanning looks for.
pub fn gold_candidates(bundle: &EntityBundle) -> Vec<(String, EntityLabel)> {
    let mut candidates = vec![
        (bundle.client_name.clone(), EntityLabel::Person),
        (bundle.client_nationality.clone(), EntityLabel::Nationality),
        (bundle.home_address.clone(), EntityLabel::Address),
        (bundle.employer_address.clone(), EntityLabel::Address),
        (bundle.case_id.clone(), EntityLabel::CaseNumber),
        (bundle.employer_tax_id.clone(), EntityLabel::TaxId),
        (bundle.employer_name.clone(), EntityLabel::Company),
        (bundle.filing_date.clone(), EntityLabel::Date),
    ];
    candidates.extend(LAW_OFFICES.iter().map(|o| (o.to_string(), EntityLabel::LawOffice)));
    candidates.extend(CITIES.iter().map(|(c, _)| (c.to_string(), EntityLabel::Location)));
    candidates
}

/// Scans `prompt` for every candidate occurrence and keeps the pairs that
/// survive overlap resolution (a city inside an address only counts when
/// it also occurs on its own). Pairs are listed in order of first occurrence.
pub fn annotate_gold(prompt: &str, candidates: &[(String, EntityLabel)]) -> Vec<GoldEntity> {
    let mut found = Vec::new();
    for (surface, label) in candidates {
        if surface.is_empty() {
            continue;
        }
        for (start, _) in prompt.match_indices(surface.as_str()) {
            let span = Span::new(start, start + surface.len());
            if let Ok(m) = EntityMention::from_span(prompt, span, *label, Source::Manual) {
                found.push(m);
            }
        }
    }
    let mut gold: Vec<GoldEntity> = Vec::new();
    for m in resolve_overlaps(found) {
        let entity = GoldEntity {
            surface: m.surface,
            label: m.label,
        };
        if !gold.contains(&entity) {
            gold.push(entity);
        }
    }
    gold
}

/// Builds `n` records from one seeded stream.
///
/// `llm` is only consulted when `source` is [`FakeTextSource::Llm`].
pub fn build_dataset(n: usize, seed: u64, source: FakeTextSource, llm: Option<&dyn ChatClient>) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Precondition("dataset size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for index in 0..n {
        let scenario = select_scenario(&mut rng);
        let bundle = fabricate_entities(&mut rng);
        let fake_text = if scenario.task_type == TaskType::Drafting {
            String::new()
        } else {
            generate_fake_text(
                &mut rng,
                &bundle,
                &scenario.practice_area,
                &scenario.subfield,
                source,
                llm,
            )?
        };
        let prompt = render_prompt(
            scenario.task_type,
            &bundle,
            &scenario.subfield,
            &scenario.practice_area,
            &fake_text,
        )?;
        let gold = annotate_gold(&prompt, &gold_candidates(&bundle));
        records.push(SyntheticRecord {
            id: format!("syn-{:04}", index + 1),
            task_type: scenario.task_type,
            practice_area: scenario.practice_area,
            subfield: scenario.subfield,
            prompt,
            gold,
            fake_text_source: source,
        });
    }

    let mut per_label: BTreeMap<EntityLabel, usize> = EntityLabel::ALL.into_iter().map(|l| (l, 0)).collect();
    let mut task_types: BTreeMap<TaskType, usize> = BTreeMap::new();
    for record in &records {
        *task_types.entry(record.task_type).or_default() += 1;
        for g in &record.gold {
            *per_label.entry(g.label).or_default() += 1;
        }
    }
    let manifest = Manifest {
        seed,
        n,
        mode: source,
        tables_version: TABLES_VERSION.to_string(),
        records: records.len(),
        entities: per_label.values().sum(),
        per_label,
        task_types,
    };
    Ok(Dataset { records, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::ChatMessage;

    struct Failing;

    impl ChatClient for Failing {
        fn complete(&self, _: &[ChatMessage]) -> Result<String> {
            panic!("offline generation must not call the model")
        }
    }

    #[test]
    fn offline_build_never_calls_client() {
        let ds = build_dataset(20, 7, FakeTextSource::Offline, Some(&Failing)).unwrap();
        assert_eq!(ds.records.len(), 20);
    }

    #[test]
    fn singleton() {
        let ds = build_dataset(1, 3, FakeTextSource::Offline, None).unwrap();
        assert_eq!(ds.records.len(), 1);
        assert_eq!(ds.manifest.records, 1);
    }

    #[test]
    fn zero_records_rejected() {
        assert!(build_dataset(0, 3, FakeTextSource::Offline, None).is_err());
    }

    #[test]
    fn gold_is_sound_and_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let scenario = select_scenario(&mut rng);
            let bundle = fabricate_entities(&mut rng);
            let text = generate_fake_text(&mut rng, &bundle, &scenario.practice_area, &scenario.subfield, FakeTextSource::Offline, None)
                .unwrap();
            let prompt = render_prompt(scenario.task_type, &bundle, &scenario.subfield, &scenario.practice_area, &text).unwrap();
            let gold = annotate_gold(&prompt, &gold_candidates(&bundle));
            for g in &gold {
                assert!(prompt.contains(&g.surface));
            }
            let has = |surface: &str, label| gold.iter().any(|g| g.surface == surface && g.label == label);
            assert!(has(&bundle.client_name, EntityLabel::Person));
            assert!(has(&bundle.client_nationality, EntityLabel::Nationality));
            assert!(has(&bundle.home_address, EntityLabel::Address));
            assert!(!gold.iter().any(|g| g.surface == bundle.visa_type));
            match scenario.task_type {
                TaskType::Summarization => {
                    assert!(has(&bundle.case_id, EntityLabel::CaseNumber));
                    assert!(has(&bundle.employer_tax_id, EntityLabel::TaxId));
                    assert!(has(&bundle.employer_name, EntityLabel::Company));
                    assert!(has(&bundle.employer_address, EntityLabel::Address));
                }
                TaskType::LegalAnalysis => {
                    assert!(has(&bundle.filing_date, EntityLabel::Date));
                    assert!(has(&bundle.case_id, EntityLabel::CaseNumber));
                    assert!(has(&bundle.employer_name, EntityLabel::Company));
                    assert!(has(&bundle.employer_address, EntityLabel::Address));
                }
                TaskType::Drafting => {
                    assert!(has(&bundle.employer_tax_id, EntityLabel::TaxId));
                    assert!(has(&bundle.employer_name, EntityLabel::Company));
                    assert!(has(&bundle.employer_address, EntityLabel::Address));
                }
                TaskType::Translation => {}
            }
            if scenario.task_type != TaskType::Drafting {
                assert!(has(&bundle.home_city, EntityLabel::Location));
            }
        }
    }

    #[test]
    fn city_only_inside_address_is_not_gold() {
        let candidates = vec![
            ("12 Oak Lane, Denver, CO 80203".to_string(), EntityLabel::Address),
            ("Denver".to_string(), EntityLabel::Location),
        ];
        let gold = annotate_gold("Lives at 12 Oak Lane, Denver, CO 80203.", &candidates);
        assert_eq!(gold.len(), 1);
        let gold = annotate_gold("Lives at 12 Oak Lane, Denver, CO 80203 near Denver.", &candidates);
        assert_eq!(gold.len(), 2);
    }

    #[test]
    fn jsonl_round_trip() {
        let ds = build_dataset(5, 1, FakeTextSource::Offline, None).unwrap();
        assert_eq!(parse_jsonl(&ds.to_jsonl()).unwrap(), ds.records);
        assert!(parse_jsonl("{not json}\n").is_err());
    }
}
