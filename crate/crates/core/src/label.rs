//! The closed set of PII categories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityLabel {
    Person,
    CaseNumber,
    DateOfBirth,
    Address,
    Company,
    TaxId,
    Location,
    Date,
    LawOffice,
    Nationality,
}

impl EntityLabel {
    /// All labels, in the order the detector prompt lists them.
    pub const ALL: [EntityLabel; 10] = [
        EntityLabel::Person,
        EntityLabel::CaseNumber,
        EntityLabel::DateOfBirth,
        EntityLabel::Address,
        EntityLabel::Company,
        EntityLabel::TaxId,
        EntityLabel::Location,
        EntityLabel::Date,
        EntityLabel::LawOffice,
        EntityLabel::Nationality,
    ];

    /// Uppercase name used inside placeholder tokens.
    pub const fn canonical_name(self) -> &'static str {
        match self {
            EntityLabel::Person => "PERSON",
            EntityLabel::CaseNumber => "CASE_NUMBER",
            EntityLabel::DateOfBirth => "DATE_OF_BIRTH",
            EntityLabel::Address => "ADDRESS",
            EntityLabel::Company => "COMPANY",
            EntityLabel::TaxId => "TAX_ID",
            EntityLabel::Location => "LOCATION",
            EntityLabel::Date => "DATE",
            EntityLabel::LawOffice => "LAW_OFFICE",
            EntityLabel::Nationality => "NATIONALITY",
        }
    }

    /// Spelling used in the one-shot detector prompt and on the NER wire.
    pub const fn prompt_spelling(self) -> &'static str {
        match self {
            EntityLabel::Person => "person",
            EntityLabel::CaseNumber => "case_number",
            EntityLabel::DateOfBirth => "date_of_birth",
            EntityLabel::Address => "address",
            EntityLabel::Company => "company",
            EntityLabel::TaxId => "tax ID",
            EntityLabel::Location => "location",
            EntityLabel::Date => "date",
            EntityLabel::LawOffice => "law office",
            EntityLabel::Nationality => "nationality",
        }
    }

    /// Lowercase row name used in report tables (`law_office`, `tax_id`, ...).
    pub fn table_name(self) -> String {
        self.canonical_name().to_ascii_lowercase()
    }

    pub fn from_canonical_name(name: &str) -> Option<EntityLabel> {
        EntityLabel::ALL
            .into_iter()
            .find(|label| label.canonical_name() == name)
    }
}

/// What to do with a label spelling outside the closed set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownLabelPolicy {
    #[default]
    Reject,
    /// Drop the offending pair and report a warning.
    Drop,
}

/// Maps a free-form label spelling onto the closed set.
///
/// Trims, lowercases and turns spaces into underscores before matching, so
/// `"tax ID"`, `"TAX_ID"` and `" tax id "` all resolve to [`EntityLabel::TaxId`].
pub fn canonical_label(spelling: &str) -> Result<EntityLabel> {
    let normalized: String = spelling
        .trim()
        .chars()
        .map(|c| if c == ' ' { '_' } else { c.to_ascii_lowercase() })
        .collect();
    EntityLabel::ALL
        .into_iter()
        .find(|label| label.canonical_name().eq_ignore_ascii_case(&normalized))
        .ok_or_else(|| Error::UnknownLabel(spelling.to_string()))
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_name())
    }
}

impl FromStr for EntityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        canonical_label(s)
    }
}

impl Serialize for EntityLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.canonical_name())
    }
}

impl<'de> Deserialize<'de> for EntityLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        canonical_label(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn closed_set_is_a_bijection() {
        let names: HashSet<_> = EntityLabel::ALL.iter().map(|l| l.canonical_name()).collect();
        let spellings: HashSet<_> = EntityLabel::ALL.iter().map(|l| l.prompt_spelling()).collect();
        assert_eq!(names.len(), 10);
        assert_eq!(spellings.len(), 10);
        let shape = regex::Regex::new(r"^[A-Z][A-Z_]*$").unwrap();
        for label in EntityLabel::ALL {
            assert!(shape.is_match(label.canonical_name()));
            assert_eq!(canonical_label(label.prompt_spelling()).unwrap(), label);
            assert_eq!(canonical_label(label.canonical_name()).unwrap(), label);
        }
    }

    #[test]
    fn prompt_label_list_matches_detector_prompt() {
        let listed: Vec<_> = EntityLabel::ALL.iter().map(|l| l.prompt_spelling()).collect();
        assert_eq!(
            listed,
            [
                "person",
                "case_number",
                "date_of_birth",
                "address",
                "company",
                "tax ID",
                "location",
                "date",
                "law office",
                "nationality"
            ]
        );
    }

    #[test]
    fn canonicalizes_spellings() {
        assert_eq!(canonical_label("tax ID").unwrap(), EntityLabel::TaxId);
        assert_eq!(canonical_label("law office").unwrap(), EntityLabel::LawOffice);
        assert_eq!(canonical_label("PERSON").unwrap(), EntityLabel::Person);
        assert_eq!(canonical_label("  Date_of_Birth ").unwrap(), EntityLabel::DateOfBirth);
    }

    #[test]
    fn rejects_unknown_spelling() {
        match canonical_label("favorite_color") {
            Err(Error::UnknownLabel(s)) => assert_eq!(s, "favorite_color"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
