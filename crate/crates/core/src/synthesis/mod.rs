//! Per-abstract summaries, topic aggregation with citation markers, and
//! citation-preserving post-editing of each topic section.

pub mod summarize;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::latex::{escape_latex, extract_citations, sanitize_llm_text};
use crate::gateway::{bindings, Gateway, GatewayError, TemplateId};

pub use summarize::{
    summarize_abstract, summary_budget, ExtractiveSummarizer, HttpSummarizer, Summarizer, SummaryBudget,
};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("paper {0} has an empty abstract")]
    EmptyAbstract(String),
    #[error("summarizer unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("no summary for paper {0}")]
    MissingSummary(String),
    #[error("no citation key for paper {0}")]
    MissingKey(String),
    #[error("nothing to post-edit")]
    EmptySection,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryStage {
    T5sum,
    Aggregated,
    PostEdited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryUnit {
    pub paper_id: String,
    pub stage: SummaryStage,
    pub text: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDraft {
    pub topic_id: i32,
    pub section_title: String,
    pub aggregated_text: String,
    pub post_edited_text: String,
    pub citation_keys: Vec<String>,
}

/// Member summaries in the given (similarity rank) order, each escaped for
/// LaTeX and followed by `\citep{key}`.
pub fn aggregate_topic(
    member_ids: &[String],
    units: &BTreeMap<String, SummaryUnit>,
    keys: &BTreeMap<String, String>,
) -> Result<String, SynthesisError> {
    let mut parts = Vec::with_capacity(member_ids.len());
    for id in member_ids {
        let unit = units.get(id).ok_or_else(|| SynthesisError::MissingSummary(id.clone()))?;
        let key = keys.get(id).ok_or_else(|| SynthesisError::MissingKey(id.clone()))?;
        parts.push(format!("{} \\citep{{{key}}}", escape_latex(unit.text.trim())));
    }
    Ok(parts.join(" "))
}

const CITATION_CORRECTION: &str = "Your previous answer dropped or altered the citations. Keep the \\citep{...} \
markers exactly as they appear in the original summary, keep at least one of them, and do not add new keys.";

/// Accepts `text` when it cites at least one key and only keys from `allowed`.
fn citations_preserved(text: &str, allowed: &BTreeSet<String>) -> bool {
    let cited = extract_citations(text);
    !cited.is_empty() && cited.iter().all(|k| allowed.contains(k))
}

/// Refines one aggregated section through the gateway. Output that loses all
/// citations or introduces unknown keys gets one corrective retry; after that
/// the aggregated text is used verbatim.
pub fn post_edit_section(
    gateway: &Gateway,
    review_title: &str,
    topic_id: i32,
    section_title: &str,
    aggregated_text: &str,
) -> Result<SectionDraft, SynthesisError> {
    if aggregated_text.trim().is_empty() {
        return Err(SynthesisError::EmptySection);
    }
    let allowed: BTreeSet<String> = extract_citations(aggregated_text).into_iter().collect();
    let b = bindings([("title", review_title), ("section_name", section_title), ("summary", aggregated_text)]);
    let mut extra = None;
    let mut edited = None;
    for attempt in 1..=2 {
        let raw = gateway.complete_template(TemplateId::PostEdit, b.clone(), extra.take())?;
        let text = sanitize_llm_text(&raw);
        if citations_preserved(&text, &allowed) {
            edited = Some(text);
            break;
        }
        log::warn!("topic {topic_id}: post-edit attempt {attempt} failed citation check");
        extra = Some(CITATION_CORRECTION.to_string());
    }
    let post_edited_text = edited.unwrap_or_else(|| {
        log::warn!("topic {topic_id}: keeping aggregated text");
        aggregated_text.to_string()
    });
    Ok(SectionDraft {
        topic_id,
        section_title: section_title.to_string(),
        aggregated_text: aggregated_text.to_string(),
        post_edited_text,
        citation_keys: allowed.into_iter().collect(),
    })
}
