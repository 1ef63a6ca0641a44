use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::counts::{MatchCounts, Scores};
use super::run::{DatasetRef, MatchMode};
use crate::error::{Error, Result};
use crate::label::EntityLabel;
use crate::masking::write_atomic;

/// Entity rows of the per-label grid, in display order.
pub const TABLE1_LABELS: [EntityLabel; 9] = [
    EntityLabel::Person,
    EntityLabel::Address,
    EntityLabel::Nationality,
    EntityLabel::Date,
    EntityLabel::Location,
    EntityLabel::LawOffice,
    EntityLabel::Company,
    EntityLabel::TaxId,
    EntityLabel::CaseNumber,
];

pub const REPORT_FILE: &str = "report.json";
pub const TABLE1_FILE: &str = "table1.txt";
pub const TABLE2_FILE: &str = "table2.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSimilarity {
    pub cosine: f64,
    pub cosine_degenerate: bool,
    pub jaro_winkler: f64,
    /// Normalized to `[0, 1]`.
    pub levenshtein: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordOutcome {
    pub id: String,
    pub counts: MatchCounts,
    pub masked_mentions: usize,
    pub similarity: Option<RecordSimilarity>,
    /// Placeholders in the upstream reply the vault could not resolve.
    pub unresolved: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMeans {
    pub cosine: f64,
    pub jaro_winkler: f64,
    pub levenshtein: f64,
    /// Number of records the means are taken over.
    pub records: usize,
    pub degenerate_cosine: usize,
    pub embedding: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub detector: String,
    pub dataset: DatasetRef,
    pub matching: MatchMode,
    pub counts: MatchCounts,
    pub overall: Scores,
    pub per_label: BTreeMap<EntityLabel, Scores>,
    pub similarity: Option<SimilarityMeans>,
    pub records: Vec<RecordOutcome>,
    pub skipped: Vec<Skip>,
}

const LABEL_WIDTH: usize = 12;
const CELL_WIDTH: usize = 16;
const METRIC_WIDTH: usize = 23;

fn join_row(first: String, cells: impl IntoIterator<Item = String>) -> String {
    let mut line = first;
    for cell in cells {
        line.push_str(" | ");
        line.push_str(&cell);
    }
    line.trim_end().to_string()
}

fn rule(first: usize, widths: &[usize]) -> String {
    let mut line = "-".repeat(first);
    for w in widths {
        line.push_str("-+-");
        line.push_str(&"-".repeat(*w));
    }
    line
}

/// Per-entity precision / recall / F1 grid, one column group per detector.
pub fn render_table1(columns: &[(&str, &BTreeMap<EntityLabel, Scores>)]) -> String {
    let widths: Vec<usize> = columns.iter().map(|(name, _)| name.chars().count().max(CELL_WIDTH)).collect();
    let mut lines = vec![
        join_row(
            format!("{:<LABEL_WIDTH$}", "Entity Type"),
            columns.iter().zip(&widths).map(|((name, _), w)| format!("{name:<w$}")),
        ),
        join_row(
            " ".repeat(LABEL_WIDTH),
            widths.iter().map(|w| format!("{:<w$}", "P     R     F1")),
        ),
        rule(LABEL_WIDTH, &widths),
    ];
    for label in TABLE1_LABELS {
        lines.push(join_row(
            format!("{:<LABEL_WIDTH$}", label.table_name()),
            columns.iter().zip(&widths).map(|((_, scores), w)| {
                let cell = match scores.get(&label) {
                    Some(s) => format!("{:.2}  {:.2}  {:.2}", s.precision, s.recall, s.f1),
                    None => "-".to_string(),
                };
                format!("{cell:<w$}")
            }),
        ));
    }
    lines.join("\n") + "\n"
}

/// Mean similarity block, one column per detector.
pub fn render_table2(columns: &[(&str, Option<&SimilarityMeans>)]) -> String {
    let widths: Vec<usize> = columns.iter().map(|(name, _)| name.chars().count().max(6)).collect();
    let mut lines = vec![
        join_row(
            format!("{:<METRIC_WIDTH$}", "Metrics (mean)"),
            columns.iter().zip(&widths).map(|((name, _), w)| format!("{name:<w$}")),
        ),
        rule(METRIC_WIDTH, &widths),
    ];
    let rows: [(&str, fn(&SimilarityMeans) -> f64); 3] = [
        ("Cosine Similarity", |s| s.cosine),
        ("Jaro-Winkler Similarity", |s| s.jaro_winkler),
        ("Levenshtein Distance", |s| s.levenshtein),
    ];
    for (metric, value) in rows {
        lines.push(join_row(
            format!("{metric:<METRIC_WIDTH$}"),
            columns.iter().zip(&widths).map(|((_, sim), w)| {
                let cell = sim.map_or_else(|| "-".to_string(), |s| format!("{:.4}", value(s)));
                format!("{cell:<w$}")
            }),
        ));
    }
    lines.join("\n") + "\n"
}

/// Writes `report.json` (an array, one entry per detector) and both tables.
pub fn write_reports(dir: &Path, reports: &[EvalReport]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::storage(dir, e))?;
    let json = serde_json::to_string_pretty(reports)? + "\n";
    write_atomic(&dir.join(REPORT_FILE), json.as_bytes())?;
    let grid: Vec<_> = reports.iter().map(|r| (r.detector.as_str(), &r.per_label)).collect();
    write_atomic(&dir.join(TABLE1_FILE), render_table1(&grid).as_bytes())?;
    let sims: Vec<_> = reports.iter().map(|r| (r.detector.as_str(), r.similarity.as_ref())).collect();
    write_atomic(&dir.join(TABLE2_FILE), render_table2(&sims).as_bytes())
}
