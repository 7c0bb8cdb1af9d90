//! Text embeddings behind a provider trait.

use std::hash::Hasher;
use std::time::Duration;

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::corpus::PaperRecord;
use super::SearchError;
use crate::evaluation::tokenize;
use crate::lexicon::is_stopword;

pub const STUB_DIM: usize = 256;
pub const STUB_MODEL_ID: &str = "stub-hash-256";
/// Whitespace tokens kept from title + abstract before embedding.
pub const MAX_INPUT_TOKENS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub dim: usize,
    pub model_id: String,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>, model_id: &str) -> Self {
        Self { dim: values.len(), values, model_id: model_id.to_string() }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn model_id(&self) -> &str;
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SearchError>;
}

/// Bag-of-tokens featurizer: lowercase alphanumeric tokens, stopwords removed
/// (all tokens kept if nothing else remains), each hashed with FNV-1a into one
/// of 256 buckets, counted, then L2-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubEmbedder;

impl StubEmbedder {
    pub fn embed_one(text: &str) -> Vec<f64> {
        let tokens = tokenize(text);
        let content: Vec<&String> = tokens.iter().filter(|t| !is_stopword(t)).collect();
        let chosen: Vec<&String> = if content.is_empty() { tokens.iter().collect() } else { content };
        let mut v = vec![0.0; STUB_DIM];
        for t in chosen {
            let mut h = FnvHasher::default();
            h.write(t.as_bytes());
            v[(h.finish() % STUB_DIM as u64) as usize] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl EmbeddingProvider for StubEmbedder {
    fn model_id(&self) -> &str {
        STUB_MODEL_ID
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SearchError> {
        Ok(texts.par_iter().map(|t| Self::embed_one(t)).collect())
    }
}

/// OpenAI-compatible `/embeddings` endpoint, e.g. a local sentence-embedding
/// server.
pub struct HttpEmbedder {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    batch_size: usize,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(endpoint: &str, model: &str, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self { endpoint: endpoint.to_string(), model: model.to_string(), api_key, batch_size: 64, agent }
    }

    fn request(&self, batch: &[String]) -> Result<Vec<Vec<f64>>, SearchError> {
        let unavailable = |m: String| SearchError::ProviderUnavailable(m);
        let body = json!({"model": self.model, "input": batch}).to_string();
        let mut req = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req.send(&body).map_err(|e| unavailable(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| unavailable(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(unavailable(format!("HTTP {status}")));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| unavailable(e.to_string()))?;
        let data = v["data"].as_array().ok_or_else(|| unavailable("response has no data array".into()))?;
        let mut rows: Vec<(u64, Vec<f64>)> = data
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let idx = d["index"].as_u64().unwrap_or(i as u64);
                let emb = d["embedding"].as_array().map(|a| a.iter().filter_map(Value::as_f64).collect()).unwrap_or_default();
                (idx, emb)
            })
            .collect();
        rows.sort_by_key(|r| r.0);
        Ok(rows.into_iter().map(|r| r.1).collect())
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SearchError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            out.extend(self.request(chunk)?);
        }
        Ok(out)
    }
}

/// Embeds every text; all vectors share one dimension and model id.
pub fn embed_texts(texts: &[String], provider: &dyn EmbeddingProvider) -> Result<Vec<EmbeddingVector>, SearchError> {
    if texts.is_empty() {
        return Err(SearchError::InvalidArgument("no texts to embed".into()));
    }
    let raw = provider.embed_batch(texts)?;
    if raw.len() != texts.len() {
        return Err(SearchError::ProviderUnavailable(format!("{} vectors for {} texts", raw.len(), texts.len())));
    }
    let dim = raw[0].len();
    if dim == 0 {
        return Err(SearchError::EmbeddingDimMismatch { expected: 1, found: 0 });
    }
    raw.into_iter()
        .map(|values| {
            if values.len() != dim {
                return Err(SearchError::EmbeddingDimMismatch { expected: dim, found: values.len() });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(SearchError::ProviderUnavailable("non-finite embedding value".into()));
            }
            Ok(EmbeddingVector::new(values, provider.model_id()))
        })
        .collect()
}

/// Title + ". " + cleaned abstract, cut to [`MAX_INPUT_TOKENS`] whitespace tokens.
pub fn embedding_input(paper: &PaperRecord) -> String {
    let joined = format!("{}. {}", paper.title, paper.abstract_clean);
    joined.split_whitespace().take(MAX_INPUT_TOKENS).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_inputs() {
        let v = embed_texts(&texts(&["a", "a"]), &StubEmbedder).unwrap();
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn distinct_unit_vectors() {
        let v = embed_texts(&texts(&["graph", "market"]), &StubEmbedder).unwrap();
        assert_ne!(v[0], v[1]);
        for e in &v {
            assert!((e.norm() - 1.0).abs() < 1e-12);
            assert_eq!(e.dim, STUB_DIM);
            assert_eq!(e.model_id, STUB_MODEL_ID);
        }
    }

    #[test]
    fn stopword_only_text_still_embeds() {
        let v = StubEmbedder::embed_one("the of and");
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stopwords_do_not_count() {
        assert_eq!(StubEmbedder::embed_one("the graph of vertices"), StubEmbedder::embed_one("graph vertices"));
    }

    #[test]
    fn shape_for_200() {
        let t: Vec<String> = (0..200).map(|i| format!("text number {i}")).collect();
        let v = embed_texts(&t, &StubEmbedder).unwrap();
        assert_eq!(v.len(), 200);
        assert!(v.iter().all(|e| e.dim == STUB_DIM));
    }

    struct Ragged;
    impl EmbeddingProvider for Ragged {
        fn model_id(&self) -> &str {
            "ragged"
        }
        fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SearchError> {
            Ok(texts.iter().enumerate().map(|(i, _)| vec![1.0; i + 1]).collect())
        }
    }

    #[test]
    fn dim_mismatch() {
        assert!(matches!(
            embed_texts(&texts(&["a", "b"]), &Ragged),
            Err(SearchError::EmbeddingDimMismatch { expected: 1, found: 2 })
        ));
        assert!(embed_texts(&[], &StubEmbedder).is_err());
    }

    #[test]
    fn input_truncation() {
        let p = PaperRecord {
            title: "T".into(),
            abstract_clean: "w ".repeat(600),
            ..PaperRecord::default()
        };
        let s = embedding_input(&p);
        assert!(s.starts_with("T. w w"));
        assert_eq!(s.split_whitespace().count(), MAX_INPUT_TOKENS);
    }
}
