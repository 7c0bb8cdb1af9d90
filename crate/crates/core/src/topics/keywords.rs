//! Class-based term weighting for topic keywords.

use std::collections::{BTreeMap, BTreeSet};

use crate::evaluation::tokenize;
use crate::lexicon::is_stopword;

/// Tokens eligible as keywords: no stopwords, digit-only tokens or single
/// characters.
pub fn keyword_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().count() > 1 && !t.chars().all(|c| c.is_ascii_digit()) && !is_stopword(t))
        .collect()
}

/// Top `keyword_count` terms per cluster.
///
/// A term's weight in cluster c is tf(t, c) * ln(C / cf(t)): its share of the
/// cluster's tokens times the log of the number of clusters over the number of
/// clusters using it. A term found in every cluster weighs 0. With a single
/// cluster the weight is tf alone. Sorted by weight descending, then term.
pub fn extract_keywords(clusters: &[Vec<usize>], texts: &[String], keyword_count: usize) -> Vec<Vec<(String, f64)>> {
    let counts: Vec<BTreeMap<String, usize>> = clusters
        .iter()
        .map(|members| {
            let mut m = BTreeMap::new();
            for &i in members {
                for t in keyword_tokens(&texts[i]) {
                    *m.entry(t).or_insert(0) += 1;
                }
            }
            m
        })
        .collect();
    let n_clusters = clusters.len() as f64;
    let mut cf: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &counts {
        for t in c.keys() {
            *cf.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    counts
        .iter()
        .map(|c| {
            let total: usize = c.values().sum();
            let mut weighted: Vec<(String, f64)> = c
                .iter()
                .map(|(t, &k)| {
                    let tf = k as f64 / total as f64;
                    let w = if clusters.len() == 1 { tf } else { tf * (n_clusters / cf[t.as_str()] as f64).ln() };
                    (t.clone(), w)
                })
                .collect();
            weighted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            weighted.truncate(keyword_count);
            weighted
        })
        .collect()
}

/// Distinct keyword terms across all clusters.
pub fn vocabulary(keywords: &[Vec<(String, f64)>]) -> BTreeSet<&str> {
    keywords.iter().flatten().map(|(t, _)| t.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts() -> Vec<String> {
        [
            "graph vertex graph shared",
            "vertex graph edge shared",
            "market price market shared",
            "price market trade shared",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    #[test]
    fn disjoint_vocabularies() {
        let kw = extract_keywords(&[vec![0, 1], vec![2, 3]], &texts(), 3);
        let terms = |i: usize| kw[i].iter().map(|k| k.0.as_str()).collect::<Vec<_>>();
        assert_eq!(terms(0), ["graph", "vertex", "edge"]);
        assert_eq!(terms(1), ["market", "price", "trade"]);
        // graph: 3 of 8 tokens, in 1 of 2 clusters
        assert!((kw[0][0].1 - 3.0 / 8.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn uniform_term_has_zero_weight() {
        let kw = extract_keywords(&[vec![0, 1], vec![2, 3]], &texts(), 10);
        let shared = kw[0].iter().find(|k| k.0 == "shared").unwrap();
        assert_eq!(shared.1, 0.0);
        assert_eq!(kw[0].last().unwrap().0, "shared");
    }

    #[test]
    fn truncation() {
        let kw = extract_keywords(&[vec![0, 1], vec![2, 3]], &texts(), 1);
        assert!(kw.iter().all(|k| k.len() == 1));
    }

    #[test]
    fn single_cluster_uses_tf() {
        let kw = extract_keywords(&[vec![0, 1, 2, 3]], &texts(), 2);
        assert_eq!(kw[0][0], ("shared".to_string(), 0.25));
    }

    #[test]
    fn filters() {
        assert_eq!(keyword_tokens("The 2024 x-ray of a graph, 3d!"), ["ray", "graph", "3d"]);
    }
}
