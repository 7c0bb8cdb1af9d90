//! Deterministic offline backend.
//!
//! Output is a pure function of (template, bindings, seed); nothing here looks
//! at the clock or the environment.

use std::hash::Hasher;
use std::sync::OnceLock;

use fnv::FnvHasher;

use super::{BackendKind, CompletionBackend, CompletionRequest, CompletionResult, GatewayError, TemplateId};

const RELATED_TERMS_RAW: &str = include_str!("../../assets/related_terms.tsv");

/// Sentences per paragraph when reflowing post-edit input.
const PARAGRAPH_SENTENCES: usize = 4;

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

struct RelatedTerms {
    rows: Vec<(String, Vec<String>)>,
    fallback: Vec<String>,
}

fn related_terms() -> &'static RelatedTerms {
    static TABLE: OnceLock<RelatedTerms> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows = Vec::new();
        let mut fallback = Vec::new();
        for line in RELATED_TERMS_RAW.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, terms) = line.split_once('\t').expect("related_terms.tsv: key<TAB>terms");
            let terms: Vec<String> = terms.split('|').map(|t| t.trim().to_string()).collect();
            if key == "*" {
                fallback = terms;
            } else {
                rows.push((key.to_lowercase(), terms));
            }
        }
        RelatedTerms { rows, fallback }
    })
}

fn stable_hash(text: &str, seed: u64) -> u64 {
    let mut h = FnvHasher::default();
    h.write(text.as_bytes());
    h.write_u64(seed);
    h.finish()
}

/// Two related terms for a topic: the row of the longest key contained in the
/// topic, or a hash-picked pair from the fallback pool.
pub(crate) fn pick_related(title: &str, seed: u64) -> [String; 2] {
    let table = related_terms();
    let lower = title.to_lowercase();
    let pool = table
        .rows
        .iter()
        .filter(|(k, _)| lower.contains(k.as_str()))
        .max_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| b.0.cmp(&a.0)))
        .map(|(_, terms)| terms)
        .unwrap_or(&table.fallback);
    if pool.len() == 2 {
        return [pool[0].clone(), pool[1].clone()];
    }
    let n = pool.len() as u64;
    let h = stable_hash(&lower, seed);
    let i = h % n;
    let j = (i + 1 + (h >> 32) % (n - 1)) % n;
    let (i, j) = (i.min(j) as usize, i.max(j) as usize);
    [pool[i].clone(), pool[j].clone()]
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_citation(token: &str) -> bool {
    token.starts_with("\\citep{")
}

/// Splits into sentences on terminal punctuation, keeping any citation tokens
/// that follow a terminator attached to that sentence, then groups sentences
/// into paragraphs. The whitespace-token sequence is unchanged.
pub(crate) fn reflow(text: &str) -> String {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut sentences: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        current.push(tok);
        i += 1;
        if tok.ends_with(['.', '!', '?']) {
            while i < tokens.len() && is_citation(tokens[i]) {
                current.push(tokens[i]);
                i += 1;
            }
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
        .chunks(PARAGRAPH_SENTENCES)
        .map(|para| para.iter().map(|s| s.join(" ")).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn framing(req: &CompletionRequest) -> String {
    let get = |k: &str| req.bindings.get(k).map(String::as_str).unwrap_or("");
    let (title, titles, papers, topics) = (get("title"), get("titles"), get("paper_count"), get("topic_count"));
    match get("section").to_lowercase().as_str() {
        "introduction" => format!(
            "This review examines {title}. It synthesizes {papers} papers retrieved from arXiv and \
             organised into {topics} topics: {titles}. Each topic section summarizes the selected \
             papers and cites them individually."
        ),
        "background" => format!(
            "Research on {title} spans several related lines of work. The papers considered here \
             were selected by semantic similarity to the expanded topic and grouped by density-based \
             clustering of their abstracts. The resulting {topics} topics are {titles}."
        ),
        "conclusion" => format!(
            "This review covered {topics} topics on {title}: {titles}. Together the {papers} \
             selected papers outline the current state of the field. The per-topic sections above \
             point to the individual studies for further reading."
        ),
        other => format!("This {other} covers {topics} topics on {title}: {titles}."),
    }
}

impl CompletionBackend for MockBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
        let get = |k: &str| {
            req.bindings.get(k).map(String::as_str).ok_or_else(|| GatewayError::UnboundPlaceholder(k.to_string()))
        };
        let seed = req.seed.unwrap_or(0);
        let text = match req.template_id {
            TemplateId::TopicExpansion => {
                let title = get("title")?.trim();
                let [a, b] = pick_related(title, seed);
                format!("{title}, {a}, {b}")
            }
            TemplateId::QueryGeneration => {
                let expanded = get("expanded_title")?;
                let head = expanded.split(',').next().unwrap_or(expanded);
                let phrase = head.replace('"', " ");
                let phrase = phrase.split_whitespace().collect::<Vec<_>>().join(" ");
                format!("(ti:\"{phrase}\" OR abs:\"{phrase}\")")
            }
            TemplateId::TopicTitle => get("topic_keywords")?
                .split(',')
                .map(str::trim)
                .filter(|k| !k.is_empty())
                .take(3)
                .flat_map(str::split_whitespace)
                .map(title_case)
                .collect::<Vec<_>>()
                .join(" "),
            TemplateId::PostEdit => reflow(get("summary")?),
            TemplateId::Framing => framing(req),
        };
        Ok(CompletionResult { text, backend: BackendKind::Mock, latency_ms: 0, token_counts: None })
    }
}
