use std::ops::Range;

use regex::RegexBuilder;

/// Finds every non-overlapping occurrence of `surface` in `text`.
///
/// Case-sensitive leftmost-first scan; when that finds nothing, retries
/// case-insensitively. Returned ranges always sit on character boundaries.
pub fn locate_spans(text: &str, surface: &str) -> Vec<Range<usize>> {
    if surface.is_empty() {
        return Vec::new();
    }
    let exact: Vec<_> = text
        .match_indices(surface)
        .map(|(start, m)| start..start + m.len())
        .collect();
    if !exact.is_empty() {
        return exact;
    }
    match RegexBuilder::new(&regex::escape(surface))
        .case_insensitive(true)
        .build()
    {
        Ok(re) => re.find_iter(text).map(|m| m.range()).collect(),
        Err(_) => Vec::new(),
    }
}
