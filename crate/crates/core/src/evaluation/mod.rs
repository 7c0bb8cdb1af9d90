//! Metrics: ROUGE-1, Flesch Reading Ease, C_v topic coherence, stage
//! similarity with a random-word control, and the metrics report format.

pub mod baseline;
pub mod coherence;
pub mod readability;
pub mod report;
pub mod rouge;
pub mod stage;

use thiserror::Error;

use crate::search::SearchError;

pub use baseline::random_baseline_document;
pub use coherence::{coherence_cv, DEFAULT_WINDOW};
pub use readability::{fres, interpret_fres, ReadabilityStats};
pub use report::{MetricRecord, MetricsReport};
pub use rouge::{f1_score, rouge1, RougeScore};
pub use stage::{stage_similarity_report, StageSimilarityReport, StageTexts, TextStage};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("text has no words")]
    NoWords,
    #[error("missing stage text: {0}")]
    MissingStage(String),
    #[error("degenerate co-occurrence counts: {0}")]
    DegenerateCounts(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Lowercases and splits on every run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}
