use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{SummaryStage, SummaryUnit, SynthesisError};
use crate::search::PaperRecord;

/// Share of the abstract kept by a summary, and the floor in tokens.
pub const SUMMARY_RATIO: f64 = 0.4;
pub const SUMMARY_FLOOR: usize = 20;

/// Summary length limit as a share of the abstract with a floor in tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryBudget {
    pub ratio: f64,
    pub floor: usize,
}

impl Default for SummaryBudget {
    fn default() -> Self {
        Self { ratio: SUMMARY_RATIO, floor: SUMMARY_FLOOR }
    }
}

impl SummaryBudget {
    pub fn tokens(&self, abstract_tokens: usize) -> usize {
        summary_budget(abstract_tokens, self.ratio, self.floor)
    }
}

/// `max(floor, ceil(ratio * tokens))`.
pub fn summary_budget(abstract_tokens: usize, ratio: f64, floor: usize) -> usize {
    floor.max((ratio * abstract_tokens as f64).ceil() as usize)
}

pub trait Summarizer: Send + Sync {
    fn name(&self) -> &str;
    /// Summary of `text` in at most `budget` whitespace tokens.
    fn summarize(&self, text: &str, budget: usize) -> Result<String, SynthesisError>;
}

/// Lead-sentence extraction. The output is always a verbatim prefix of the
/// input's token sequence.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractiveSummarizer;

fn sentences(tokens: &[&str]) -> Vec<usize> {
    // token counts of consecutive sentences
    let mut out = Vec::new();
    let mut len = 0;
    for t in tokens {
        len += 1;
        if t.ends_with(['.', '!', '?']) {
            out.push(len);
            len = 0;
        }
    }
    if len > 0 {
        out.push(len);
    }
    out
}

impl Summarizer for ExtractiveSummarizer {
    fn name(&self) -> &str {
        "extractive"
    }

    fn summarize(&self, text: &str, budget: usize) -> Result<String, SynthesisError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let mut take = 0;
        for len in sentences(&tokens) {
            if take + len > budget {
                break;
            }
            take += len;
        }
        // A first sentence longer than the budget is cut at the budget.
        if take == 0 {
            take = budget.min(tokens.len());
        }
        Ok(tokens[..take].join(" "))
    }
}

/// Abstractive summarizer behind an HTTP inference endpoint that accepts
/// `{"inputs": text, "parameters": {"max_length": n}}` and answers
/// `[{"summary_text": ...}]`.
pub struct HttpSummarizer {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpSummarizer {
    pub fn new(endpoint: &str, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self { endpoint: endpoint.to_string(), api_key, agent }
    }
}

impl Summarizer for HttpSummarizer {
    fn name(&self) -> &str {
        "http"
    }

    fn summarize(&self, text: &str, budget: usize) -> Result<String, SynthesisError> {
        let unavailable = |m: String| SynthesisError::ProviderUnavailable(m);
        let body = json!({"inputs": text, "parameters": {"max_length": budget, "do_sample": false}}).to_string();
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
        v[0]["summary_text"]
            .as_str()
            .or_else(|| v["summary_text"].as_str())
            .map(str::to_string)
            .ok_or_else(|| unavailable("response has no summary_text".into()))
    }
}

/// Summarizes one paper's cleaned abstract within the budget. When the
/// provider fails and `fallback` is set, the extractive summarizer is used
/// instead, with a warning.
pub fn summarize_abstract(
    paper: &PaperRecord,
    summarizer: &dyn Summarizer,
    budget: &SummaryBudget,
    fallback: bool,
) -> Result<SummaryUnit, SynthesisError> {
    let text = paper.abstract_clean.trim();
    if text.is_empty() {
        return Err(SynthesisError::EmptyAbstract(paper.arxiv_id.clone()));
    }
    let budget = budget.tokens(text.split_whitespace().count());
    let summary = match summarizer.summarize(text, budget) {
        Ok(s) if !s.trim().is_empty() => s,
        Ok(_) | Err(_) if fallback => {
            log::warn!("{}: {} summarizer failed, using extractive fallback", paper.arxiv_id, summarizer.name());
            ExtractiveSummarizer.summarize(text, budget)?
        }
        Ok(_) => return Err(SynthesisError::ProviderUnavailable(format!("{} returned nothing", summarizer.name()))),
        Err(e) => return Err(e),
    };
    // Abstractive output is held to the same budget.
    let tokens: Vec<&str> = summary.split_whitespace().take(budget).collect();
    Ok(SummaryUnit {
        paper_id: paper.arxiv_id.clone(),
        stage: SummaryStage::T5sum,
        token_count: tokens.len(),
        text: tokens.join(" "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::rouge1;
    use proptest::prelude::*;

    fn paper(text: &str) -> PaperRecord {
        PaperRecord { arxiv_id: "2301.00001".into(), abstract_clean: text.into(), ..Default::default() }
    }

    #[test]
    fn budget() {
        assert_eq!(summary_budget(15, 0.4, 20), 20);
        assert_eq!(summary_budget(100, 0.4, 20), 40);
        assert_eq!(summary_budget(101, 0.4, 20), 41);
    }

    #[test]
    fn ten_sentence_abstract() {
        // 10 sentences of 8 tokens: 80 tokens, budget 32, so 4 sentences.
        let s: String = (0..10).map(|i| format!("Sentence {i} has exactly eight tokens in it. ")).collect();
        let u = summarize_abstract(&paper(&s), &ExtractiveSummarizer, &SummaryBudget::default(), false).unwrap();
        assert_eq!(u.token_count, 32);
        assert!(u.text.ends_with("Sentence 3 has exactly eight tokens in it."));
    }

    #[test]
    fn short_abstract_kept_whole() {
        let s = "A short abstract of exactly fifteen tokens that fits well within the twenty token floor.";
        assert_eq!(s.split_whitespace().count(), 15);
        assert_eq!(summarize_abstract(&paper(s), &ExtractiveSummarizer, &SummaryBudget::default(), false).unwrap().text, s);
    }

    #[test]
    fn long_first_sentence_is_cut() {
        let s = vec!["word"; 70].join(" ") + ". Tail.";
        let u = summarize_abstract(&paper(&s), &ExtractiveSummarizer, &SummaryBudget::default(), false).unwrap();
        assert_eq!(u.token_count, 29);
    }

    #[test]
    fn empty_abstract() {
        assert!(matches!(summarize_abstract(&paper("  "), &ExtractiveSummarizer, &SummaryBudget::default(), true), Err(SynthesisError::EmptyAbstract(_))));
    }

    struct Broken;
    impl Summarizer for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn summarize(&self, _: &str, _: usize) -> Result<String, SynthesisError> {
            Err(SynthesisError::ProviderUnavailable("down".into()))
        }
    }

    #[test]
    fn provider_failure_falls_back() {
        let s = "One sentence here. Another one there.";
        assert_eq!(summarize_abstract(&paper(s), &Broken, &SummaryBudget::default(), true).unwrap().text, s);
        assert!(summarize_abstract(&paper(s), &Broken, &SummaryBudget::default(), false).is_err());
    }

    proptest! {
        #[test]
        fn budget_and_precision(words in prop::collection::vec("[a-z]{1,8}[.]?", 1..200)) {
            let text = words.join(" ");
            let u = summarize_abstract(&paper(&text), &ExtractiveSummarizer, &SummaryBudget::default(), false).unwrap();
            prop_assert!(u.token_count <= summary_budget(words.len(), SUMMARY_RATIO, SUMMARY_FLOOR));
            prop_assert_eq!(u.token_count, u.text.split_whitespace().count());
            prop_assert_eq!(rouge1(&u.text, &text).precision, 1.0);
        }
    }
}
