//! Character-level string similarity over Unicode scalar values.

use crate::error::{Error, Result};

pub const WINKLER_PREFIX_SCALE: f64 = 0.1;
pub const WINKLER_MAX_PREFIX: usize = 4;

/// Edit distance counting single-character insertions, deletions and
/// substitutions.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = diagonal + usize::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = substitution.min(row[j] + 1).min(diagonal + 1);
        }
    }
    row[b.len()]
}

/// `levenshtein / max(len)`; two empty strings are at distance 0.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / longest as f64
}

pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a == b {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }

    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_matched = vec![false; a.len()];
    let mut b_matched = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_matched[j] && b[j] == *ca {
                a_matched[i] = true;
                b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }

    let a_seq = a.iter().zip(&a_matched).filter(|(_, m)| **m).map(|(c, _)| c);
    let b_seq = b.iter().zip(&b_matched).filter(|(_, m)| **m).map(|(c, _)| c);
    let out_of_order = a_seq.zip(b_seq).filter(|(x, y)| x != y).count();
    let transpositions = out_of_order as f64 / 2.0;

    let m = matches as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - transpositions) / m) / 3.0
}

/// Jaro-Winkler with the usual prefix scale 0.1 and prefix cap 4.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    jaro_winkler_with(a, b, WINKLER_PREFIX_SCALE, WINKLER_MAX_PREFIX).expect("standard parameters are valid")
}

pub fn jaro_winkler_with(a: &str, b: &str, prefix_scale: f64, max_prefix: usize) -> Result<f64> {
    if !(0.0..=0.25).contains(&prefix_scale) {
        return Err(Error::Precondition(format!(
            "prefix scale {prefix_scale} outside [0, 0.25]"
        )));
    }
    let j = jaro(a, b);
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(max_prefix)
        .take_while(|(x, y)| x == y)
        .count();
    Ok(j + prefix as f64 * prefix_scale * (1.0 - j))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert!((normalized_levenshtein("kitten", "sitting") - 3.0 / 7.0).abs() < 1e-12);
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(normalized_levenshtein("", "abc"), 1.0);
        assert_eq!(normalized_levenshtein("", ""), 0.0);
        // counted in characters, not bytes
        assert_eq!(levenshtein("é", "e"), 1);
    }

    #[test]
    fn jaro_winkler_reference_values() {
        assert!((jaro_winkler("MARTHA", "MARHTA") - 0.961_111_111_1).abs() < 1e-9);
        assert!((jaro("MARTHA", "MARHTA") - 0.944_444_444_4).abs() < 1e-9);
        assert!((jaro_winkler("DIXON", "DICKSONX") - 0.813_333_333_3).abs() < 1e-9);
        assert!((jaro_winkler("DWAYNE", "DUANE") - 0.84).abs() < 1e-9);
        assert_eq!(jaro_winkler("same", "same"), 1.0);
        assert_eq!(jaro_winkler("abc", "xyz"), 0.0);
        assert_eq!(jaro("", ""), 1.0);
        assert_eq!(jaro("a", ""), 0.0);
    }

    #[test]
    fn prefix_scale_bounds() {
        assert!(jaro_winkler_with("a", "a", 0.3, 4).is_err());
        assert!(jaro_winkler_with("a", "a", 0.25, 4).is_ok());
    }

    proptest! {
        #[test]
        fn winkler_never_below_jaro(a in "[a-d]{0,8}", b in "[a-d]{0,8}") {
            let j = jaro(&a, &b);
            let jw = jaro_winkler(&a, &b);
            prop_assert!(jw >= j);
            prop_assert!(jw <= 1.0 + 1e-12);
            let prefix = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
            if prefix == 0 || j == 0.0 {
                prop_assert_eq!(jw, j);
            }
        }

        #[test]
        fn levenshtein_is_symmetric_and_bounded(a in "\\PC{0,10}", b in "\\PC{0,10}") {
            let d = levenshtein(&a, &b);
            prop_assert_eq!(d, levenshtein(&b, &a));
            prop_assert!(d <= a.chars().count().max(b.chars().count()));
            let n = normalized_levenshtein(&a, &b);
            prop_assert!((0.0..=1.0).contains(&n));
        }
    }
}
