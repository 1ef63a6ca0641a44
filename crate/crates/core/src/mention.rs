use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::EntityLabel;

/// Matches any placeholder-shaped token, minted or not.
pub(crate) static PLACEHOLDER_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[[A-Z][A-Z_]*_\d+\]").expect("placeholder regex"));

pub fn contains_placeholder(text: &str) -> bool {
    PLACEHOLDER_TOKEN.is_match(text)
}

/// Byte ranges of every placeholder-shaped token in `text`.
pub fn placeholder_spans(text: &str) -> Vec<Range<usize>> {
    PLACEHOLDER_TOKEN.find_iter(text).map(|m| m.range()).collect()
}

/// Which detector produced a mention.
///
/// The declaration order is the tie-break priority used when two mentions
/// cover the same span: lower sorts first and wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Manual,
    NerService,
    Llm,
    Pattern,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Manual => "manual",
            Source::NerService => "ner-service",
            Source::Llm => "llm",
            Source::Pattern => "pattern",
        })
    }
}

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub const fn len(&self) -> usize {
        self.end - self.start
    }

    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub const fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub const fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

impl From<Range<usize>> for Span {
    fn from(r: Range<usize>) -> Self {
        Span::new(r.start, r.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub label: EntityLabel,
    pub span: Span,
    pub source: Source,
}

impl EntityMention {
    /// Builds a mention for `text[span]`, enforcing the span invariants.
    pub fn from_span(text: &str, span: Span, label: EntityLabel, source: Source) -> Result<Self> {
        let surface = slice_checked(text, span)?;
        if contains_placeholder(surface) {
            return Err(Error::InvalidMention(format!(
                "surface {surface:?} contains a placeholder token"
            )));
        }
        Ok(EntityMention {
            surface: surface.to_string(),
            label,
            span,
            source,
        })
    }

    /// Checks that this mention still describes `text` byte-exactly.
    pub fn validate(&self, text: &str) -> Result<()> {
        match text.get(self.span.range()) {
            Some(s) if !self.span.is_empty() && s == self.surface => {
                if contains_placeholder(&self.surface) {
                    Err(Error::InvalidMention(format!(
                        "surface {:?} contains a placeholder token",
                        self.surface
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::SpanMismatch {
                surface: self.surface.clone(),
                start: self.span.start,
                end: self.span.end,
            }),
        }
    }
}

fn slice_checked(text: &str, span: Span) -> Result<&str> {
    if span.is_empty() {
        return Err(Error::InvalidMention(format!(
            "empty span {}..{}",
            span.start, span.end
        )));
    }
    text.get(span.range()).ok_or_else(|| {
        Error::InvalidMention(format!(
            "span {}..{} is out of bounds or not on a character boundary",
            span.start, span.end
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_priority_order() {
        let mut sources = vec![Source::Pattern, Source::Llm, Source::Manual, Source::NerService];
        sources.sort();
        assert_eq!(
            sources,
            [Source::Manual, Source::NerService, Source::Llm, Source::Pattern]
        );
    }

    #[test]
    fn from_span_enforces_invariants() {
        let text = "Héllo [PERSON_1] there";
        let m = EntityMention::from_span(text, Span::new(0, 6), EntityLabel::Person, Source::Manual)
            .unwrap();
        assert_eq!(m.surface, "Héllo");
        // mid-character boundary
        assert!(EntityMention::from_span(text, Span::new(0, 2), EntityLabel::Person, Source::Manual).is_err());
        assert!(EntityMention::from_span(text, Span::new(3, 3), EntityLabel::Person, Source::Manual).is_err());
        assert!(EntityMention::from_span(text, Span::new(7, 99), EntityLabel::Person, Source::Manual).is_err());
        assert!(EntityMention::from_span(text, Span::new(7, 17), EntityLabel::Person, Source::Manual).is_err());
    }

    #[test]
    fn placeholder_shape() {
        assert!(contains_placeholder("x [TAX_ID_12] y"));
        assert!(!contains_placeholder("[person_1]"));
        assert!(!contains_placeholder("[PERSON_]"));
        assert!(!contains_placeholder("[_1]"));
        assert_eq!(placeholder_spans("a[A_1]b[B_C_2]"), vec![1..6, 7..14]);
    }
}
