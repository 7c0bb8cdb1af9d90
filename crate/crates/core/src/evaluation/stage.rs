use serde::{Deserialize, Serialize};

use super::baseline::random_baseline_document;
use super::EvalError;
use crate::search::{cosine_similarity, embed_texts, EmbeddingProvider, EmbeddingVector};

/// Pipeline stages whose text is compared against the topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TextStage {
    /// Selected abstracts.
    Abs,
    /// Per-paper summaries.
    T5Sum,
    /// Post-edited topic sections.
    GptSec,
    /// The assembled review body.
    GptSlr,
}

impl TextStage {
    pub const ALL: [TextStage; 4] = [TextStage::Abs, TextStage::T5Sum, TextStage::GptSec, TextStage::GptSlr];

    pub fn label(self) -> &'static str {
        match self {
            TextStage::Abs => "Abs",
            TextStage::T5Sum => "T5Sum",
            TextStage::GptSec => "GPTSec",
            TextStage::GptSlr => "GPTSLR",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTexts {
    pub abs: Option<String>,
    pub t5sum: Option<String>,
    pub gpt_sec: Option<String>,
    pub gpt_slr: Option<String>,
}

impl StageTexts {
    pub fn get(&self, stage: TextStage) -> Option<&str> {
        match stage {
            TextStage::Abs => self.abs.as_deref(),
            TextStage::T5Sum => self.t5sum.as_deref(),
            TextStage::GptSec => self.gpt_sec.as_deref(),
            TextStage::GptSlr => self.gpt_slr.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSimilarityReport {
    pub abs: f64,
    pub t5sum: f64,
    pub gpt_sec: f64,
    pub gpt_slr: f64,
    pub random: f64,
}

impl StageSimilarityReport {
    /// (label, value) rows in table order, the random control last.
    pub fn rows(&self) -> [(&'static str, f64); 5] {
        [("Abs", self.abs), ("T5Sum", self.t5sum), ("GPTSec", self.gpt_sec), ("GPTSLR", self.gpt_slr), ("Random", self.random)]
    }
}

/// Cosine between the topic embedding and each stage's text, plus a random
/// lexicon document of `baseline_words` words drawn with `baseline_seed`.
pub fn stage_similarity_report(
    topic: &EmbeddingVector,
    texts: &StageTexts,
    provider: &dyn EmbeddingProvider,
    baseline_seed: u64,
    baseline_words: usize,
) -> Result<StageSimilarityReport, EvalError> {
    let mut inputs = Vec::with_capacity(5);
    for stage in TextStage::ALL {
        match texts.get(stage) {
            Some(t) if !t.trim().is_empty() => inputs.push(t.to_string()),
            _ => return Err(EvalError::MissingStage(stage.label().to_string())),
        }
    }
    inputs.push(random_baseline_document(baseline_seed, baseline_words));
    let vectors = embed_texts(&inputs, provider)?;
    let sims = vectors.iter().map(|v| cosine_similarity(topic, v)).collect::<Result<Vec<_>, _>>()?;
    Ok(StageSimilarityReport { abs: sims[0], t5sum: sims[1], gpt_sec: sims[2], gpt_slr: sims[3], random: sims[4] })
}
