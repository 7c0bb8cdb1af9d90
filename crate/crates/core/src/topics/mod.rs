//! Topic modeling over screening embeddings.
//!
//! The pipeline is BERTopic-shaped: project the embeddings with
//! [`reduce::reduce_dimensions`], cluster with [`hdbscan::hdbscan`], tune the
//! minimum topic size until the topic count falls in a target band, weight
//! keywords per cluster, then ask the gateway for section titles.

pub mod cluster;
pub mod hdbscan;
pub mod keywords;
pub mod reduce;
pub mod title;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, GatewayError};

pub use cluster::{cluster_documents, tune_topic_count, RawClusters, TuneOutcome};
pub use keywords::extract_keywords;
pub use title::title_topics;

pub const OUTLIER_TOPIC: i32 = -1;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("{n} documents cannot form two topics of the minimum size (need {needed})")]
    TooFewDocuments { n: usize, needed: usize },
    #[error("tuning failed: best attempt produced {best_count} topics")]
    TuningFailed { best_count: usize },
    #[error("invalid topic parameters: {0}")]
    InvalidParams(String),
    #[error("topic {0} has no keywords")]
    NoKeywords(i32),
    #[error("partition violation: {0}")]
    PartitionViolation(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicModelParams {
    pub target_topic_min: usize,
    pub target_topic_max: usize,
    pub min_topic_size: usize,
    pub max_tuning_iterations: usize,
    pub keyword_count: usize,
}

impl Default for TopicModelParams {
    fn default() -> Self {
        Self { target_topic_min: 4, target_topic_max: 10, min_topic_size: 5, max_tuning_iterations: 8, keyword_count: 10 }
    }
}

impl TopicModelParams {
    /// Defaults with the starting minimum topic size scaled to the corpus:
    /// max(5, n / 40).
    pub fn for_corpus(n: usize) -> Self {
        Self { min_topic_size: (n / 40).max(5), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |m: &str| Err(TopicError::InvalidParams(m.to_string()));
        if self.target_topic_min < 2 || self.target_topic_min > self.target_topic_max {
            return bad("need 2 <= target_topic_min <= target_topic_max");
        }
        if self.min_topic_size < 2 {
            return bad("min_topic_size must be at least 2");
        }
        if self.keyword_count < 1 {
            return bad("keyword_count must be at least 1");
        }
        if self.max_tuning_iterations < 1 {
            return bad("max_tuning_iterations must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCluster {
    pub topic_id: i32,
    pub member_ids: Vec<String>,
    pub keywords: Vec<(String, f64)>,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub clusters: Vec<TopicCluster>,
    pub outlier_ids: Vec<String>,
    pub params_used: TopicModelParams,
    pub iterations_used: usize,
    pub coherence: Option<f64>,
}

impl TopicReport {
    pub fn paper_count(&self) -> usize {
        self.clusters.iter().map(|c| c.member_ids.len()).sum::<usize>() + self.outlier_ids.len()
    }

    /// Every id in `expected` appears exactly once across clusters and
    /// outliers, and nothing else does.
    pub fn check_partition<S: AsRef<str>>(&self, expected: &[S]) -> Result<(), TopicError> {
        let mut got: Vec<&str> =
            self.clusters.iter().flat_map(|c| c.member_ids.iter()).chain(&self.outlier_ids).map(String::as_str).collect();
        let mut want: Vec<&str> = expected.iter().map(AsRef::as_ref).collect();
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Err(TopicError::PartitionViolation(format!(
                "{} assigned ids do not match the {} selected ids",
                got.len(),
                want.len()
            )));
        }
        Ok(())
    }
}

/// Assembles a report, rejecting ids that appear more than once.
pub fn build_topic_report(
    clusters: Vec<TopicCluster>,
    outlier_ids: Vec<String>,
    params: TopicModelParams,
    iterations: usize,
) -> Result<TopicReport, TopicError> {
    let mut seen = HashSet::new();
    for id in clusters.iter().flat_map(|c| c.member_ids.iter()).chain(&outlier_ids) {
        if !seen.insert(id.as_str()) {
            return Err(TopicError::PartitionViolation(format!("{id} assigned more than once")));
        }
    }
    for c in &clusters {
        if c.topic_id < 0 {
            return Err(TopicError::PartitionViolation(format!("cluster with reserved id {}", c.topic_id)));
        }
        if c.keywords.windows(2).any(|w| w[0].1 < w[1].1) || c.keywords.iter().any(|k| !(k.1.is_finite() && k.1 >= 0.0)) {
            return Err(TopicError::PartitionViolation(format!("topic {} keywords not sorted or not finite", c.topic_id)));
        }
    }
    Ok(TopicReport { clusters, outlier_ids, params_used: params, iterations_used: iterations, coherence: None })
}

/// Tunes, clusters, extracts keywords and titles topics for the documents
/// `ids[i]` with `embeddings[i]` and `texts[i]`.
pub fn model_topics(
    gateway: &Gateway,
    ids: &[String],
    embeddings: &[Vec<f64>],
    texts: &[String],
    params: &TopicModelParams,
    seed: u64,
) -> Result<TopicReport, TopicError> {
    let outcome = tune_topic_count(embeddings, params, seed)?;
    let members = outcome.clusters.members();
    let keywords = extract_keywords(&members, texts, params.keyword_count);
    let mut clusters: Vec<TopicCluster> = members
        .iter()
        .zip(keywords)
        .enumerate()
        .map(|(t, (m, kw))| TopicCluster {
            topic_id: t as i32,
            member_ids: m.iter().map(|&i| ids[i].clone()).collect(),
            keywords: kw,
            title: String::new(),
        })
        .collect();
    title_topics(gateway, &mut clusters)?;
    let outliers = outcome.clusters.outliers().into_iter().map(|i| ids[i].clone()).collect();
    let report = build_topic_report(clusters, outliers, outcome.params, outcome.iterations)?;
    report.check_partition(ids)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(id: i32, members: &[&str]) -> TopicCluster {
        TopicCluster {
            topic_id: id,
            member_ids: members.iter().map(|s| s.to_string()).collect(),
            keywords: vec![("k".into(), 0.5), ("j".into(), 0.1)],
            title: "T".into(),
        }
    }

    #[test]
    fn eleven_ids() {
        let r = build_topic_report(
            vec![cluster(0, &["1", "2", "3", "4"]), cluster(1, &["5", "6", "7"]), cluster(2, &["8", "9", "10"])],
            vec!["11".into()],
            TopicModelParams::default(),
            1,
        )
        .unwrap();
        assert_eq!(r.paper_count(), 11);
        let ids: Vec<String> = (1..=11).map(|i| i.to_string()).collect();
        r.check_partition(&ids).unwrap();
        assert!(r.check_partition(&ids[..10]).is_err());
    }

    #[test]
    fn duplicate_rejected() {
        let err = build_topic_report(
            vec![cluster(0, &["1", "2"]), cluster(1, &["2", "3"])],
            vec![],
            TopicModelParams::default(),
            1,
        );
        assert!(matches!(err, Err(TopicError::PartitionViolation(_))));
    }

    #[test]
    fn serde_round_trip() {
        let r = build_topic_report(vec![cluster(0, &["a"])], vec!["b".into()], TopicModelParams::default(), 2).unwrap();
        let text = serde_json::to_string_pretty(&r).unwrap();
        assert_eq!(serde_json::from_str::<TopicReport>(&text).unwrap(), r);
    }

    #[test]
    fn params_validation() {
        assert!(TopicModelParams::default().validate().is_ok());
        assert!(TopicModelParams { target_topic_min: 1, ..Default::default() }.validate().is_err());
        assert!(TopicModelParams { min_topic_size: 1, ..Default::default() }.validate().is_err());
        assert_eq!(TopicModelParams::for_corpus(400).min_topic_size, 10);
        assert_eq!(TopicModelParams::for_corpus(60).min_topic_size, 5);
    }
}
