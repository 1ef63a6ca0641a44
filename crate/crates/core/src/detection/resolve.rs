use std::cmp::Reverse;

use crate::mention::EntityMention;

/// Merges mentions from any number of detectors into a conflict-free list.
///
/// Candidates are ranked by span length (longer first), then start offset,
/// then source priority, then label name; the ranking is total, so greedy
/// acceptance gives the same answer for every input order. The result is
/// sorted by start offset with pairwise-disjoint spans.
pub fn resolve_overlaps(mut mentions: Vec<EntityMention>) -> Vec<EntityMention> {
    mentions.sort_by(|a, b| rank(a).cmp(&rank(b)));
    mentions.dedup();

    let mut kept: Vec<EntityMention> = Vec::with_capacity(mentions.len());
    for candidate in mentions {
        if kept.iter().all(|k| !k.span.overlaps(&candidate.span)) {
            kept.push(candidate);
        }
    }
    kept.sort_by_key(|m| m.span);
    kept
}

fn rank(m: &EntityMention) -> (Reverse<usize>, usize, crate::mention::Source, &'static str, &str) {
    (
        Reverse(m.span.len()),
        m.span.start,
        m.source,
        m.label.canonical_name(),
        m.surface.as_str(),
    )
}
