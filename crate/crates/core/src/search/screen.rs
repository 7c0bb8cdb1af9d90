use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::corpus::{PaperRecord, ScoredPaper};
use super::embed::EmbeddingVector;
use super::SearchError;

/// Cosine of the angle between two embeddings, clamped to [-1, 1].
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SearchError> {
    cosine(&a.values, &b.values)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SearchError> {
    if a.len() != b.len() {
        return Err(SearchError::DimMismatch { left: a.len(), right: b.len() });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(SearchError::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Anything rankable by score with an id tiebreak.
pub trait Ranked {
    fn score(&self) -> f64;
    fn tie_key(&self) -> &str;
}

impl Ranked for ScoredPaper {
    fn score(&self) -> f64 {
        self.similarity
    }
    fn tie_key(&self) -> &str {
        &self.paper.arxiv_id
    }
}

impl Ranked for (f64, String) {
    fn score(&self) -> f64 {
        self.0
    }
    fn tie_key(&self) -> &str {
        &self.1
    }
}

/// Orders better items first: higher score, then smaller id.
pub fn rank_order<T: Ranked>(a: &T, b: &T) -> Ordering {
    b.score().total_cmp(&a.score()).then_with(|| a.tie_key().cmp(b.tie_key()))
}

// Heap entry whose maximum is the worst item kept so far.
struct Worst<T>(T);

impl<T: Ranked> PartialEq for Worst<T> {
    fn eq(&self, other: &Self) -> bool {
        rank_order(&self.0, &other.0) == Ordering::Equal
    }
}
impl<T: Ranked> Eq for Worst<T> {}
impl<T: Ranked> PartialOrd for Worst<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Ranked> Ord for Worst<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(&self.0, &other.0)
    }
}

/// The `k` best items, best first, in O(n log k).
pub fn top_k<T: Ranked>(items: impl IntoIterator<Item = T>, k: usize) -> Vec<T> {
    if k == 0 {
        return Vec::new();
    }
    let mut heap = BinaryHeap::with_capacity(k + 1);
    for item in items {
        if heap.len() < k {
            heap.push(Worst(item));
        } else if let Some(worst) = heap.peek() {
            if rank_order(&item, &worst.0) == Ordering::Less {
                heap.pop();
                heap.push(Worst(item));
            }
        }
    }
    heap.into_sorted_vec().into_iter().map(|w| w.0).collect()
}

/// Scores every paper against the topic and keeps the `k` most similar,
/// sorted by similarity descending with ties broken by ascending arxiv_id.
pub fn filter_top_k(
    topic: &EmbeddingVector,
    papers: &[(PaperRecord, EmbeddingVector)],
    k: usize,
) -> Result<Vec<ScoredPaper>, SearchError> {
    if k == 0 {
        return Err(SearchError::InvalidArgument("k must be at least 1".into()));
    }
    let scored = papers
        .iter()
        .map(|(paper, v)| Ok(ScoredPaper { paper: paper.clone(), similarity: cosine_similarity(topic, v)? }))
        .collect::<Result<Vec<_>, SearchError>>()?;
    Ok(top_k(scored, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(v: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(v.to_vec(), "t")
    }

    #[test]
    fn hand_values() {
        assert!((cosine_similarity(&ev(&[1.0, 0.0]), &ev(&[1.0, 1.0])).unwrap() - 0.70710678).abs() < 1e-8);
        assert_eq!(cosine_similarity(&ev(&[1.0, 0.0]), &ev(&[0.0, 1.0])).unwrap(), 0.0);
        let v = ev(&[0.3, -0.2, 0.9]);
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(SearchError::DimMismatch { left: 1, right: 2 })));
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(SearchError::ZeroVector)));
    }

    fn scores(pairs: &[(&str, f64)]) -> Vec<(f64, String)> {
        pairs.iter().map(|(id, s)| (*s, id.to_string())).collect()
    }

    fn ids(v: &[(f64, String)]) -> Vec<&str> {
        v.iter().map(|x| x.1.as_str()).collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(ids(&top_k(scores(&[("A", 0.9), ("B", 0.5), ("C", 0.7)]), 2)), ["A", "C"]);
        assert_eq!(ids(&top_k(scores(&[("A", 0.5), ("B", 0.5)]), 1)), ["A"]);
        assert_eq!(ids(&top_k(scores(&[("B", 0.5), ("A", 0.5)]), 1)), ["A"]);
        let five = scores(&[("a", 0.1), ("b", 0.4), ("c", 0.3), ("d", 0.2), ("e", 0.5)]);
        assert_eq!(ids(&top_k(five, 200)), ["e", "b", "c", "d", "a"]);
    }

    #[test]
    fn filter_on_papers() {
        let paper = |id: &str| PaperRecord { arxiv_id: id.into(), ..PaperRecord::default() };
        let papers = vec![
            (paper("x"), ev(&[1.0, 0.0])),
            (paper("y"), ev(&[0.0, 1.0])),
            (paper("z"), ev(&[1.0, 1.0])),
        ];
        let got = filter_top_k(&ev(&[1.0, 0.1]), &papers, 2).unwrap();
        assert_eq!(got.iter().map(|s| s.paper.arxiv_id.as_str()).collect::<Vec<_>>(), ["x", "z"]);
        assert!(filter_top_k(&ev(&[1.0, 0.1]), &papers, 0).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in prop::collection::vec(-10.0f64..10.0, 8), b in prop::collection::vec(-10.0f64..10.0, 8), c in 0.01f64..100.0) {
            prop_assume!(a.iter().any(|x| *x != 0.0) && b.iter().any(|x| *x != 0.0));
            let ab = cosine(&a, &b).unwrap();
            prop_assert_eq!(ab, cosine(&b, &a).unwrap());
            prop_assert!((-1.0..=1.0).contains(&ab));
            let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
            prop_assert!((cosine(&a, &scaled).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn heap_matches_sort(raw in prop::collection::vec((0u8..20, 0u16..500), 0..300), k in 1usize..320) {
            let items: Vec<(f64, String)> = raw.iter().map(|(s, id)| (*s as f64 / 20.0, format!("{id:04}"))).collect();
            let mut oracle = items.clone();
            oracle.sort_by(rank_order);
            oracle.truncate(k);
            prop_assert_eq!(top_k(items, k), oracle);
        }
    }
}
