use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::gateway::{api_key_from_env, model_preset, BackendKind, GatewayConfig};
use crate::search::arxiv::MAX_RESULTS_CAP;
use crate::synthesis::SummaryBudget;
use crate::topics::TopicModelParams;

pub const DEFAULT_SWEEP_LIMITS: [usize; 4] = [50, 100, 200, 400];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub topic: String,
    pub backend: BackendKind,
    /// `gpt-3.5-like`, `gpt-4o-like`, or a literal model id.
    pub model_preset: String,
    pub max_results: usize,
    pub top_k: usize,
    pub target_topic_min: usize,
    pub target_topic_max: usize,
    /// Starting minimum topic size; `None` scales it to the corpus.
    pub min_topic_size: Option<usize>,
    pub max_tuning_iterations: usize,
    pub keyword_count: usize,
    pub summary: SummaryBudget,
    /// HTTP summarization endpoint; `None` uses the extractive summarizer.
    pub summarizer_endpoint: Option<String>,
    /// OpenAI-style embeddings endpoint; `None` uses the offline hashing
    /// embedder.
    pub embedding_endpoint: Option<String>,
    pub embedding_model: String,
    pub llm_seed: u64,
    pub cluster_seed: u64,
    pub baseline_seed: u64,
    pub baseline_words: usize,
    pub rate_limit_rpm: u32,
    /// Bundled feed used in mock mode; `None` picks one by topic.
    pub fixture: Option<String>,
    pub output_dir: PathBuf,
    pub sweep_limits: Vec<usize>,
    /// Timed repetitions per sweep point; the fastest is reported.
    pub sweep_repeats: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            topic: String::new(),
            backend: BackendKind::Mock,
            model_preset: "gpt-3.5-like".into(),
            max_results: 3000,
            top_k: 200,
            target_topic_min: 4,
            target_topic_max: 10,
            min_topic_size: None,
            max_tuning_iterations: 8,
            keyword_count: 10,
            summary: SummaryBudget::default(),
            summarizer_endpoint: None,
            embedding_endpoint: None,
            embedding_model: "text-embedding-3-small".into(),
            llm_seed: 0,
            cluster_seed: 42,
            baseline_seed: 7,
            baseline_words: 500,
            rate_limit_rpm: 60,
            fixture: None,
            output_dir: PathBuf::from("runs"),
            sweep_limits: DEFAULT_SWEEP_LIMITS.to_vec(),
            sweep_repeats: 3,
        }
    }
}

impl PipelineConfig {
    pub fn mock(topic: &str) -> Self {
        Self { topic: topic.to_string(), ..Self::default() }
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn model_id(&self) -> String {
        model_preset(&self.model_preset).map(str::to_string).unwrap_or_else(|| self.model_preset.clone())
    }

    /// Topic parameters for a corpus of `n` selected papers.
    pub fn topic_params(&self, n: usize) -> TopicModelParams {
        let scaled = TopicModelParams::for_corpus(n);
        TopicModelParams {
            target_topic_min: self.target_topic_min,
            target_topic_max: self.target_topic_max,
            min_topic_size: self.min_topic_size.unwrap_or(scaled.min_topic_size),
            max_tuning_iterations: self.max_tuning_iterations,
            keyword_count: self.keyword_count,
        }
    }

    pub fn gateway_config(&self) -> GatewayConfig {
        GatewayConfig {
            backend: self.backend,
            model_id: self.model_id(),
            rate_limit_rpm: self.rate_limit_rpm,
            seed: Some(self.llm_seed),
            ..GatewayConfig::default()
        }
    }

    /// Everything checked before the first stage runs.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.topic.trim().is_empty() {
            return bad("topic is empty".into());
        }
        if self.top_k < 1 || self.top_k > self.max_results {
            return bad(format!("need 1 <= top_k <= max_results, got top_k={} max_results={}", self.top_k, self.max_results));
        }
        if self.max_results > MAX_RESULTS_CAP {
            return bad(format!("max_results may not exceed {MAX_RESULTS_CAP}"));
        }
        if !(self.summary.ratio > 0.0 && self.summary.ratio <= 1.0) || self.summary.floor < 1 {
            return bad("summary ratio must be in (0, 1] and floor at least 1".into());
        }
        if self.baseline_words < 1 {
            return bad("baseline_words must be at least 1".into());
        }
        if self.sweep_limits.is_empty() || self.sweep_limits.contains(&0) || self.sweep_limits.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sweep_limits must be a strictly increasing list of positive sizes".into());
        }
        if self.sweep_repeats < 1 {
            return bad("sweep_repeats must be at least 1".into());
        }
        if let Some(f) = &self.fixture {
            if crate::search::fixtures::feed(f).is_none() {
                return bad(format!("unknown fixture {f:?}"));
            }
        }
        self.topic_params(self.top_k).validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.backend == BackendKind::Remote && api_key_from_env().is_none() {
            return bad("the remote backend needs LITREVIEW_API_KEY or OPENAI_API_KEY".into());
        }
        Ok(())
    }

    /// `<topic slug>-<12 hex digits of the config hash>`. The output directory
    /// and sweep settings do not take part.
    pub fn run_id(&self) -> String {
        let mut keyed = self.clone();
        keyed.output_dir = PathBuf::new();
        keyed.sweep_limits.clear();
        keyed.sweep_repeats = 0;
        let json = serde_json::to_string(&keyed).expect("config serializes");
        let digest = hex::encode(Sha256::digest(json.as_bytes()));
        format!("{}-{}", slug(&self.topic), &digest[..12])
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(self.run_id())
    }
}

/// Lowercase ASCII words joined by '-', at most 48 characters.
pub fn slug(text: &str) -> String {
    let ascii = deunicode::deunicode(text).to_lowercase();
    let words: Vec<&str> = ascii.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()).collect();
    let mut s = String::new();
    for w in words {
        if s.len() + w.len() + 1 > 48 {
            break;
        }
        if !s.is_empty() {
            s.push('-');
        }
        s.push_str(w);
    }
    if s.is_empty() {
        "topic".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PipelineConfig::mock("X").validate().is_ok());
        let c = PipelineConfig { top_k: 300, max_results: 200, ..PipelineConfig::mock("X") };
        assert!(matches!(c.validate(), Err(PipelineError::Config(_))));
        assert!(PipelineConfig::mock(" ").validate().is_err());
        let c = PipelineConfig { sweep_limits: vec![20, 10], ..PipelineConfig::mock("X") };
        assert!(c.validate().is_err());
    }

    #[test]
    fn run_id_is_stable() {
        let a = PipelineConfig::mock("Explainable Artificial Intelligence");
        let b = PipelineConfig { output_dir: "/elsewhere".into(), ..a.clone() };
        assert_eq!(a.run_id(), b.run_id());
        assert!(a.run_id().starts_with("explainable-artificial-intelligence-"));
        let c = PipelineConfig { top_k: 100, ..a.clone() };
        assert_ne!(a.run_id(), c.run_id());
    }

    #[test]
    fn toml_round_trip() {
        let c = PipelineConfig { top_k: 40, fixture: Some("vr".into()), ..PipelineConfig::mock("Virtual Reality") };
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<PipelineConfig>(&text).unwrap(), c);
        let partial: PipelineConfig = toml::from_str("topic = \"Blockchain\"\ntop_k = 20").unwrap();
        assert_eq!((partial.top_k, partial.max_results), (20, 3000));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Explainable AI: a Review!"), "explainable-ai-a-review");
        assert_eq!(slug("???"), "topic");
    }
}
