use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::label::EntityLabel;
use crate::synthgen::GoldEntity;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

/// Overall counts plus a per-label partition of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub overall: Counts,
    pub per_label: BTreeMap<EntityLabel, Counts>,
}

impl Default for MatchCounts {
    fn default() -> Self {
        MatchCounts {
            overall: Counts::default(),
            per_label: EntityLabel::ALL.into_iter().map(|l| (l, Counts::default())).collect(),
        }
    }
}

impl AddAssign<&MatchCounts> for MatchCounts {
    fn add_assign(&mut self, rhs: &MatchCounts) {
        self.overall += rhs.overall;
        for (label, counts) in &rhs.per_label {
            *self.per_label.entry(*label).or_default() += *counts;
        }
    }
}

/// Multiset matching on exact `(surface, label)` pairs.
pub fn match_entities(gold: &[GoldEntity], predicted: &[GoldEntity]) -> MatchCounts {
    match_keyed(
        gold.iter().map(|g| ((g.surface.as_str(), g.label), g.label)),
        predicted.iter().map(|p| ((p.surface.as_str(), p.label), p.label)),
    )
}

/// Multiset matching on arbitrary keys, each tagged with the label it counts under.
pub fn match_keyed<K: Eq + Hash>(
    gold: impl IntoIterator<Item = (K, EntityLabel)>,
    predicted: impl IntoIterator<Item = (K, EntityLabel)>,
) -> MatchCounts {
    let mut remaining: HashMap<K, (usize, EntityLabel)> = HashMap::new();
    for (key, label) in gold {
        remaining.entry(key).or_insert((0, label)).0 += 1;
    }
    let mut counts = MatchCounts::default();
    for (key, label) in predicted {
        let slot = counts.per_label.entry(label).or_default();
        match remaining.get_mut(&key) {
            Some((left, _)) if *left > 0 => {
                *left -= 1;
                slot.tp += 1;
            }
            _ => slot.fp += 1,
        }
    }
    for (left, label) in remaining.into_values() {
        counts.per_label.entry(label).or_default().fn_ += left;
    }
    for c in counts.per_label.values() {
        counts.overall += *c;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Precision had an empty denominator and was set to 1.
    pub vacuous_precision: bool,
    /// Recall had an empty denominator and was set to 1.
    pub vacuous_recall: bool,
}

pub fn precision_recall_f1(counts: Counts) -> Scores {
    let ratio = |num: usize, den: usize| if den == 0 { (1.0, true) } else { (num as f64 / den as f64, false) };
    let (precision, vacuous_precision) = ratio(counts.tp, counts.tp + counts.fp);
    let (recall, vacuous_recall) = ratio(counts.tp, counts.tp + counts.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Scores {
        precision,
        recall,
        f1,
        vacuous_precision,
        vacuous_recall,
    }
}
