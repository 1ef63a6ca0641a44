//! Synthetic immigration-law prompts with construction-time gold annotations.

mod dataset;
mod fabricate;
pub mod tables;
mod templates;

use std::collections::BTreeMap;

pub use dataset::{
    annotate_gold, build_dataset, gold_candidates, parse_jsonl, read_jsonl, to_jsonl, Dataset, GoldEntity, Manifest,
    SyntheticRecord, DATASET_FILE, MANIFEST_FILE,
};
pub use fabricate::{fabricate_entities, select_scenario, EntityBundle, Scenario, TaskType};
pub use templates::{fake_text_request, generate_fake_text, render_prompt, FakeTextSource};

use crate::detection::RuleSet;
use crate::label::EntityLabel;

/// Gazetteer and rules covering every surface the generator can produce.
pub fn default_rule_set() -> RuleSet {
    let gazetteer = BTreeMap::from([
        (EntityLabel::Person, tables::person_names().collect()),
        (
            EntityLabel::Nationality,
            tables::NATIONALITIES.iter().map(|s| s.to_string()).collect(),
        ),
        (EntityLabel::Company, tables::companies().collect()),
        (
            EntityLabel::LawOffice,
            tables::LAW_OFFICES.iter().map(|s| s.to_string()).collect(),
        ),
        (
            EntityLabel::Location,
            tables::CITIES.iter().map(|(c, _)| c.to_string()).collect(),
        ),
    ]);
    let month = tables::MONTHS.join("|");
    let suffix = tables::STREET_SUFFIXES.join("|");
    let rules = BTreeMap::from([
        (EntityLabel::CaseNumber, r"\b[A-Z]{3}-\d{4}-\d{5}\b".to_string()),
        (EntityLabel::TaxId, r"\b\d{2}-\d{7}\b".to_string()),
        (EntityLabel::Date, format!(r"\b(?:{month}) \d{{1,2}}, \d{{4}}\b")),
        (
            EntityLabel::Address,
            format!(r"\b\d{{1,5}} [A-Z][a-z]+ (?:{suffix}), [A-Z][A-Za-z]*(?: [A-Z][A-Za-z]*)*, [A-Z]{{2}} \d{{5}}\b"),
        ),
    ]);
    RuleSet { gazetteer, rules }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::PatternDetector;

    #[test]
    fn default_rules_find_all_gold() {
        let detector = PatternDetector::new(&default_rule_set()).unwrap();
        let ds = build_dataset(50, 7, FakeTextSource::Offline, None).unwrap();
        for record in &ds.records {
            let mut found: Vec<GoldEntity> = Vec::new();
            for m in detector.find(&record.prompt) {
                let g = GoldEntity { surface: m.surface, label: m.label };
                if !found.contains(&g) {
                    found.push(g);
                }
            }
            let mut gold = record.gold.clone();
            gold.sort();
            found.sort();
            assert_eq!(found, gold, "{}", record.prompt);
        }
    }
}
