use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub overlap_count: usize,
    pub candidate_len: usize,
    pub reference_len: usize,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

/// Unigram overlap of `candidate` against `reference`, clipped per token.
pub fn rouge1(candidate: &str, reference: &str) -> RougeScore {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    let rc = counts(&r);
    let overlap: usize = counts(&c).iter().map(|(t, n)| (*n).min(rc.get(t).copied().unwrap_or(0))).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(overlap, c.len());
    let recall = ratio(overlap, r.len());
    RougeScore {
        precision,
        recall,
        f1: f1_score(precision, recall),
        overlap_count: overlap,
        candidate_len: c.len(),
        reference_len: r.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity() {
        let s = rouge1("a b c a", "a b c a");
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_counted() {
        let s = rouge1("the cat sat", "the cat ran");
        assert_eq!(s.overlap_count, 2);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn clipped_counts() {
        let s = rouge1("the the the", "the cat");
        assert_eq!(s.overlap_count, 1);
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.recall, 0.5);
    }

    #[test]
    fn empty_inputs() {
        let s = rouge1("", "");
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        assert_eq!(rouge1("", "x").recall, 0.0);
    }

    #[test]
    fn f1_table_value() {
        assert!((f1_score(0.963, 0.405) - 0.570).abs() <= 0.001);
    }

    proptest! {
        #[test]
        fn symmetry_and_bounds(a in "[a-d ]{0,40}", b in "[a-d ]{0,40}") {
            let ab = rouge1(&a, &b);
            let ba = rouge1(&b, &a);
            prop_assert_eq!(ab.precision, ba.recall);
            prop_assert_eq!(ab.recall, ba.precision);
            for v in [ab.precision, ab.recall, ab.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(ab.f1 == 0.0, ab.overlap_count == 0);
        }

        #[test]
        fn subset_has_full_precision(words in prop::collection::vec("[a-e]{1,3}", 1..30), keep in prop::collection::vec(any::<bool>(), 30)) {
            let reference = words.join(" ");
            let candidate: Vec<&str> = words.iter().zip(&keep).filter(|(_, k)| **k).map(|(w, _)| w.as_str()).collect();
            prop_assume!(!candidate.is_empty());
            prop_assert_eq!(rouge1(&candidate.join(" "), &reference).precision, 1.0);
        }
    }
}
