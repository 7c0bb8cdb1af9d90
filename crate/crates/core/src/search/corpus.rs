use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::SearchError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    /// Canonical id with version suffix, e.g. `2401.01234v2`.
    pub arxiv_id: String,
    pub title: String,
    pub abstract_raw: String,
    pub abstract_clean: String,
    pub authors: Vec<String>,
    /// `YYYY-MM-DD`
    pub published: String,
    pub primary_category: String,
    pub url: String,
}

impl PaperRecord {
    pub fn year(&self) -> Option<u16> {
        self.published.get(..4).and_then(|y| y.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPaper {
    pub paper: PaperRecord,
    pub similarity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub raw_topic: String,
    pub expanded_topic: String,
    pub query_string: String,
    pub retrieved: Vec<PaperRecord>,
    pub selected: Vec<ScoredPaper>,
    pub retrieved_count: usize,
    pub selected_count: usize,
    /// Elapsed wall-clock seconds for search and screening.
    pub wall_time_s: f64,
}

impl Corpus {
    /// Checks the subset, ordering, uniqueness and size invariants.
    pub fn validate(&self, top_k: usize, max_results: usize) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::CorpusInvariant(m));
        if self.retrieved_count != self.retrieved.len() || self.selected_count != self.selected.len() {
            return bad("counts disagree with lists".into());
        }
        if self.retrieved_count > max_results {
            return bad(format!("{} retrieved > max_results {max_results}", self.retrieved_count));
        }
        if self.selected_count > top_k {
            return bad(format!("{} selected > top_k {top_k}", self.selected_count));
        }
        let mut ids = HashSet::new();
        for p in &self.retrieved {
            if !ids.insert(p.arxiv_id.as_str()) {
                return bad(format!("duplicate id {}", p.arxiv_id));
            }
        }
        for s in &self.selected {
            if !ids.contains(s.paper.arxiv_id.as_str()) {
                return bad(format!("selected {} was not retrieved", s.paper.arxiv_id));
            }
            if !(-1.0..=1.0).contains(&s.similarity) {
                return bad(format!("similarity {} out of range", s.similarity));
            }
        }
        if self.selected.windows(2).any(|w| w[0].similarity < w[1].similarity) {
            return bad("selected not sorted by similarity".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper(id: &str) -> PaperRecord {
        PaperRecord { arxiv_id: id.into(), published: "2023-05-01".into(), ..Default::default() }
    }

    fn corpus() -> Corpus {
        Corpus {
            retrieved: vec![paper("a"), paper("b"), paper("c")],
            selected: vec![
                ScoredPaper { paper: paper("b"), similarity: 0.9 },
                ScoredPaper { paper: paper("a"), similarity: 0.4 },
            ],
            retrieved_count: 3,
            selected_count: 2,
            ..Default::default()
        }
    }

    #[test]
    fn valid() {
        corpus().validate(2, 3).unwrap();
        assert_eq!(paper("a").year(), Some(2023));
    }

    #[test]
    fn violations() {
        assert!(corpus().validate(1, 3).is_err());
        assert!(corpus().validate(2, 2).is_err());
        let mut c = corpus();
        c.selected[0].paper.arxiv_id = "zz".into();
        assert!(c.validate(2, 3).is_err());
        let mut c = corpus();
        c.selected.swap(0, 1);
        assert!(c.validate(2, 3).is_err());
    }
}
