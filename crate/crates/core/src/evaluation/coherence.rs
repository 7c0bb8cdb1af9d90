//! C_v topic coherence.
//!
//! Boolean sliding windows over each document (a document shorter than the
//! window is one window), NPMI between every pair of a topic's keywords,
//! one-set segmentation with indirect cosine: each keyword's NPMI vector
//! against the sum of all the topic's vectors. Arithmetic mean over keywords,
//! then over topics.

use std::collections::{BTreeMap, BTreeSet};

use super::{tokenize, EvalError};

pub const DEFAULT_WINDOW: usize = 110;
const EPS: f64 = 1e-12;

/// Window counts: total windows, per-word and per-pair occurrence counts.
pub struct WindowCounts {
    pub windows: usize,
    single: BTreeMap<String, usize>,
    pair: BTreeMap<(String, String), usize>,
}

impl WindowCounts {
    /// Counts windows of `window` tokens that contain each word of `vocab`
    /// and each pair of them.
    pub fn new(docs: &[Vec<String>], vocab: &BTreeSet<String>, window: usize) -> Self {
        let window = window.max(1);
        let mut single = BTreeMap::new();
        let mut pair = BTreeMap::new();
        let mut windows = 0;
        for doc in docs {
            let idx: Vec<Option<&String>> = doc.iter().map(|t| vocab.get(t)).collect();
            let mut present: BTreeMap<&String, usize> = BTreeMap::new();
            let span = window.min(doc.len());
            for w in idx.iter().take(span).flatten() {
                *present.entry(w).or_insert(0) += 1;
            }
            let n_windows = if doc.len() <= window { 1 } else { doc.len() - window + 1 };
            for s in 0..n_windows {
                if s > 0 {
                    if let Some(w) = idx[s - 1] {
                        let e = present.get_mut(w).expect("counted on entry");
                        *e -= 1;
                        if *e == 0 {
                            present.remove(w);
                        }
                    }
                    if let Some(w) = idx[s + window - 1] {
                        *present.entry(w).or_insert(0) += 1;
                    }
                }
                windows += 1;
                let words: Vec<&String> = present.keys().copied().collect();
                for (i, a) in words.iter().enumerate() {
                    *single.entry((*a).clone()).or_insert(0) += 1;
                    for b in &words[i + 1..] {
                        *pair.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
                    }
                }
            }
        }
        Self { windows, single, pair }
    }

    pub fn count(&self, w: &str) -> usize {
        self.single.get(w).copied().unwrap_or(0)
    }

    pub fn co_count(&self, a: &str, b: &str) -> usize {
        if a == b {
            return self.count(a);
        }
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.pair.get(&key).copied().unwrap_or(0)
    }

    pub fn npmi(&self, a: &str, b: &str) -> f64 {
        let n = self.windows as f64;
        let p_ab = self.co_count(a, b) as f64 / n;
        let (p_a, p_b) = (self.count(a) as f64 / n, self.count(b) as f64 / n);
        ((p_ab + EPS) / (p_a * p_b)).ln() / -(p_ab + EPS).ln()
    }
}

fn cosine_or_zero(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// C_v of one topic whose keywords all occur in `counts`.
pub fn topic_cv(words: &[&str], counts: &WindowCounts) -> f64 {
    let vectors: Vec<Vec<f64>> = words.iter().map(|a| words.iter().map(|b| counts.npmi(a, b)).collect()).collect();
    let total: Vec<f64> = (0..words.len()).map(|j| vectors.iter().map(|v| v[j]).sum()).collect();
    vectors.iter().map(|v| cosine_or_zero(v, &total)).sum::<f64>() / words.len() as f64
}

/// Mean C_v over topics. Keywords absent from the corpus are skipped with a
/// warning; a topic left with fewer than 2 keywords is skipped.
pub fn coherence_cv(topics: &[Vec<String>], texts: &[String], window: usize) -> Result<f64, EvalError> {
    if texts.is_empty() {
        return Err(EvalError::InvalidArgument("empty corpus".into()));
    }
    if let Some(t) = topics.iter().position(|k| k.len() < 2) {
        return Err(EvalError::InvalidArgument(format!("topic {t} has fewer than 2 keywords")));
    }
    let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
    let vocab: BTreeSet<String> = topics.iter().flatten().map(|k| k.to_lowercase()).collect();
    let counts = WindowCounts::new(&docs, &vocab, window);
    let mut scores = Vec::new();
    for (t, keywords) in topics.iter().enumerate() {
        let lowered: Vec<String> = keywords.iter().map(|k| k.to_lowercase()).collect();
        let present: Vec<&str> = lowered
            .iter()
            .map(String::as_str)
            .filter(|k| {
                let ok = counts.count(k) > 0;
                if !ok {
                    log::warn!("topic {t}: keyword {k:?} does not occur in the corpus");
                }
                ok
            })
            .collect();
        if present.len() < 2 {
            log::warn!("topic {t}: fewer than 2 keywords occur in the corpus; skipped");
            continue;
        }
        scores.push(topic_cv(&present, &counts));
    }
    if scores.is_empty() {
        return Err(EvalError::DegenerateCounts("no topic has 2 keywords present in the corpus".into()));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn perfect_co_occurrence() {
        let texts = s(&["alpha beta gamma", "gamma beta alpha", "alpha gamma beta filler"]);
        let v = coherence_cv(&[s(&["alpha", "beta", "gamma"])], &texts, 110).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn window_counting() {
        let docs = vec![s(&["a", "x", "b", "x", "a"])];
        let vocab: BTreeSet<String> = s(&["a", "b"]).into_iter().collect();
        let c = WindowCounts::new(&docs, &vocab, 2);
        // windows: [a x] [x b] [b x] [x a]
        assert_eq!(c.windows, 4);
        assert_eq!(c.count("a"), 2);
        assert_eq!(c.count("b"), 2);
        assert_eq!(c.co_count("a", "b"), 0);
        let c = WindowCounts::new(&docs, &vocab, 3);
        // [a x b] [x b x] [b x a]
        assert_eq!((c.windows, c.co_count("b", "a")), (3, 2));
    }

    #[test]
    fn short_document_is_one_window() {
        let docs = vec![s(&["a", "b"])];
        let vocab: BTreeSet<String> = s(&["a", "b"]).into_iter().collect();
        let c = WindowCounts::new(&docs, &vocab, 10);
        assert_eq!((c.windows, c.co_count("a", "b")), (1, 1));
    }

    #[test]
    fn absent_keywords_skipped() {
        let texts = s(&["alpha beta", "beta gamma"]);
        let with_missing = coherence_cv(&[s(&["alpha", "beta", "zeta"])], &texts, 110).unwrap();
        let without = coherence_cv(&[s(&["alpha", "beta"])], &texts, 110).unwrap();
        assert_eq!(with_missing, without);
        assert!(matches!(coherence_cv(&[s(&["zeta", "eta"])], &texts, 110), Err(EvalError::DegenerateCounts(_))));
        assert!(coherence_cv(&[s(&["alpha"])], &texts, 110).is_err());
    }
}
