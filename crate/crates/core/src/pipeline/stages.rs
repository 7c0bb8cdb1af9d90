//! The nine stages. Each reads its inputs from earlier checkpoints in the run
//! directory and writes its own, so any prefix of the run can be skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError, Stage};
use crate::document::{
    assemble_and_export, assign_citation_keys, generate_bibtex, generate_framing_sections, latex_to_plain, write_atomic,
    ReviewDocument,
};
use crate::evaluation::{
    coherence_cv, fres, rouge1, stage_similarity_report, MetricsReport, StageTexts, DEFAULT_WINDOW,
};
use crate::gateway::{api_key_from_env, expand_topic, generate_search_query, BackendKind, Gateway};
use crate::search::{
    embed_texts, embedding_input, fetch_papers, filter_top_k, fixtures, EmbeddingProvider, EmbeddingVector, FeedSource,
    FixtureFeedSource, HttpEmbedder, HttpFeedSource, PaperRecord, StubEmbedder,
};
use crate::synthesis::{
    aggregate_topic, post_edit_section, summarize_abstract, ExtractiveSummarizer, HttpSummarizer, SectionDraft,
    Summarizer, SummaryUnit,
};
use crate::topics::{model_topics, TopicReport};

pub const EXPAND_FILE: &str = "expand.json";
pub const QUERY_FILE: &str = "query.json";
pub const RETRIEVED_FILE: &str = "retrieved.jsonl";
pub const SELECTED_FILE: &str = "selected.jsonl";
pub const TOPICS_FILE: &str = "topics.json";
pub const SUMMARIES_FILE: &str = "summaries.jsonl";
pub const SECTIONS_FILE: &str = "sections.json";
pub const REVIEW_JSON_FILE: &str = "review.json";
pub const REVIEW_TEX_FILE: &str = "review.tex";
pub const REVIEW_BIB_FILE: &str = "review.bib";
pub const METRICS_FILE: &str = "metrics.jsonl";

const OPENAI_EMBEDDINGS_URL: &str = "https://api.openai.com/v1/embeddings";

/// Checkpoint files written by each stage.
pub fn stage_files(stage: Stage) -> &'static [&'static str] {
    match stage {
        Stage::Expand => &[EXPAND_FILE],
        Stage::Query => &[QUERY_FILE],
        Stage::Fetch => &[RETRIEVED_FILE],
        Stage::Screen => &[SELECTED_FILE],
        Stage::Cluster => &[TOPICS_FILE],
        Stage::Summarize => &[SUMMARIES_FILE],
        Stage::Postedit => &[SECTIONS_FILE],
        Stage::Assemble => &[REVIEW_JSON_FILE, REVIEW_TEX_FILE, REVIEW_BIB_FILE],
        Stage::Evaluate => &[METRICS_FILE],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandCheckpoint {
    pub raw_topic: String,
    pub expanded_topic: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryCheckpoint {
    pub query: String,
}

/// One screened paper with the embedding reused by clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedRecord {
    pub rank: usize,
    pub similarity: f64,
    pub paper: PaperRecord,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionsCheckpoint {
    pub review_title: String,
    /// arXiv id to citation key.
    pub citation_keys: BTreeMap<String, String>,
    pub sections: Vec<SectionDraft>,
}

/// Services shared by the stages of one run.
pub struct RunContext {
    pub config: PipelineConfig,
    pub dir: PathBuf,
    pub gateway: Gateway,
    pub embedder: Box<dyn EmbeddingProvider>,
    pub feed: Box<dyn FeedSource>,
    pub summarizer: Box<dyn Summarizer>,
}

impl RunContext {
    /// Mock runs read the bundled feed and embed offline; remote runs talk to
    /// arXiv and the configured model endpoints.
    pub fn new(config: &PipelineConfig, dir: &Path) -> Result<Self, PipelineError> {
        let gateway = Gateway::from_config(config.gateway_config())?;
        let feed: Box<dyn FeedSource> = match config.backend {
            BackendKind::Mock => {
                let name = config.fixture.clone().unwrap_or_else(|| fixtures::fixture_for_topic(&config.topic).to_string());
                let xml = fixtures::feed(&name).ok_or_else(|| PipelineError::Config(format!("unknown fixture {name:?}")))?;
                Box::new(FixtureFeedSource::from_feed(xml)?)
            }
            BackendKind::Remote => Box::new(HttpFeedSource::default()),
        };
        let embedder: Box<dyn EmbeddingProvider> = match (&config.embedding_endpoint, config.backend) {
            (Some(url), _) => Box::new(HttpEmbedder::new(url, &config.embedding_model, api_key_from_env())),
            (None, BackendKind::Remote) => {
                Box::new(HttpEmbedder::new(OPENAI_EMBEDDINGS_URL, &config.embedding_model, api_key_from_env()))
            }
            (None, BackendKind::Mock) => Box::new(StubEmbedder),
        };
        let summarizer: Box<dyn Summarizer> = match &config.summarizer_endpoint {
            Some(url) => Box::new(HttpSummarizer::new(url, api_key_from_env())),
            None => Box::new(ExtractiveSummarizer),
        };
        Ok(Self { config: config.clone(), dir: dir.to_path_buf(), gateway, embedder, feed, summarizer })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(value).expect("checkpoint serializes") + "\n";
        write_atomic(&self.path(name), text.as_bytes())?;
        Ok(())
    }

    fn write_jsonl<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), PipelineError> {
        let text: String = rows.iter().map(|r| serde_json::to_string(r).expect("row serializes") + "\n").collect();
        write_atomic(&self.path(name), text.as_bytes())?;
        Ok(())
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T, PipelineError> {
        read_json(&self.path(name))
    }

    pub fn read_jsonl<T: DeserializeOwned>(&self, name: &str) -> Result<Vec<T>, PipelineError> {
        read_jsonl(&self.path(name))
    }

    pub fn review_title(&self) -> String {
        self.config.topic.trim().to_string()
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Checkpoint(format!("{}: {e}", path.display())))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| PipelineError::Checkpoint(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn run_stage(ctx: &RunContext, stage: Stage) -> Result<(), PipelineError> {
    match stage {
        Stage::Expand => expand(ctx),
        Stage::Query => query(ctx),
        Stage::Fetch => fetch(ctx),
        Stage::Screen => screen(ctx),
        Stage::Cluster => cluster(ctx),
        Stage::Summarize => summarize(ctx),
        Stage::Postedit => postedit(ctx),
        Stage::Assemble => assemble(ctx),
        Stage::Evaluate => evaluate(ctx),
    }
}

fn expand(ctx: &RunContext) -> Result<(), PipelineError> {
    let expanded_topic = expand_topic(&ctx.gateway, &ctx.config.topic)?;
    ctx.write_json(EXPAND_FILE, &ExpandCheckpoint { raw_topic: ctx.config.topic.clone(), expanded_topic })
}

fn query(ctx: &RunContext) -> Result<(), PipelineError> {
    let e: ExpandCheckpoint = ctx.read_json(EXPAND_FILE)?;
    let query = generate_search_query(&ctx.gateway, &e.expanded_topic)?;
    ctx.write_json(QUERY_FILE, &QueryCheckpoint { query })
}

fn fetch(ctx: &RunContext) -> Result<(), PipelineError> {
    let q: QueryCheckpoint = ctx.read_json(QUERY_FILE)?;
    let papers = fetch_papers(ctx.feed.as_ref(), &q.query, ctx.config.max_results)?;
    if papers.is_empty() {
        log::warn!("query {:?} returned no papers", q.query);
    }
    ctx.write_jsonl(RETRIEVED_FILE, &papers)
}

fn topic_embedding(ctx: &RunContext, expanded: &str) -> Result<EmbeddingVector, PipelineError> {
    Ok(embed_texts(&[expanded.to_string()], ctx.embedder.as_ref())?.remove(0))
}

fn screen(ctx: &RunContext) -> Result<(), PipelineError> {
    let e: ExpandCheckpoint = ctx.read_json(EXPAND_FILE)?;
    let papers: Vec<PaperRecord> = ctx.read_jsonl(RETRIEVED_FILE)?;
    if papers.is_empty() {
        return Err(PipelineError::Checkpoint("no retrieved papers to screen".into()));
    }
    let topic = topic_embedding(ctx, &e.expanded_topic)?;
    let inputs: Vec<String> = papers.iter().map(embedding_input).collect();
    let vectors = embed_texts(&inputs, ctx.embedder.as_ref())?;
    let k = ctx.config.top_k.min(papers.len());
    if k < ctx.config.top_k {
        log::warn!("top_k {} exceeds the {} retrieved papers; keeping all", ctx.config.top_k, papers.len());
    }
    let pairs: Vec<(PaperRecord, EmbeddingVector)> = papers.into_iter().zip(vectors).collect();
    let selected = filter_top_k(&topic, &pairs, k)?;
    let by_id: BTreeMap<&str, &EmbeddingVector> = pairs.iter().map(|(p, v)| (p.arxiv_id.as_str(), v)).collect();
    let rows: Vec<SelectedRecord> = selected
        .into_iter()
        .enumerate()
        .map(|(rank, s)| SelectedRecord {
            rank,
            similarity: s.similarity,
            embedding: by_id[s.paper.arxiv_id.as_str()].values.clone(),
            paper: s.paper,
        })
        .collect();
    ctx.write_jsonl(SELECTED_FILE, &rows)
}

fn cluster(ctx: &RunContext) -> Result<(), PipelineError> {
    let selected: Vec<SelectedRecord> = ctx.read_jsonl(SELECTED_FILE)?;
    let ids: Vec<String> = selected.iter().map(|s| s.paper.arxiv_id.clone()).collect();
    let embeddings: Vec<Vec<f64>> = selected.iter().map(|s| s.embedding.clone()).collect();
    let texts: Vec<String> = selected.iter().map(|s| s.paper.abstract_clean.clone()).collect();
    let params = ctx.config.topic_params(selected.len());
    let mut report = model_topics(&ctx.gateway, &ids, &embeddings, &texts, &params, ctx.config.cluster_seed)?;
    let keyword_lists: Vec<Vec<String>> =
        report.clusters.iter().map(|c| c.keywords.iter().map(|k| k.0.clone()).collect()).collect();
    report.coherence = match coherence_cv(&keyword_lists, &texts, DEFAULT_WINDOW) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("coherence not computed: {e}");
            None
        }
    };
    ctx.write_json(TOPICS_FILE, &report)
}

fn summarize(ctx: &RunContext) -> Result<(), PipelineError> {
    let selected: Vec<SelectedRecord> = ctx.read_jsonl(SELECTED_FILE)?;
    let (summarizer, budget) = (ctx.summarizer.as_ref(), &ctx.config.summary);
    let units = selected
        .par_iter()
        .map(|s| summarize_abstract(&s.paper, summarizer, budget, true))
        .collect::<Result<Vec<SummaryUnit>, _>>()?;
    ctx.write_jsonl(SUMMARIES_FILE, &units)
}

fn postedit(ctx: &RunContext) -> Result<(), PipelineError> {
    let selected: Vec<SelectedRecord> = ctx.read_jsonl(SELECTED_FILE)?;
    let report: TopicReport = ctx.read_json(TOPICS_FILE)?;
    let units: Vec<SummaryUnit> = ctx.read_jsonl(SUMMARIES_FILE)?;
    let units: BTreeMap<String, SummaryUnit> = units.into_iter().map(|u| (u.paper_id.clone(), u)).collect();
    let rank: BTreeMap<&str, usize> = selected.iter().map(|s| (s.paper.arxiv_id.as_str(), s.rank)).collect();
    let clustered: Vec<&PaperRecord> = selected
        .iter()
        .filter(|s| report.clusters.iter().any(|c| c.member_ids.contains(&s.paper.arxiv_id)))
        .map(|s| &s.paper)
        .collect();
    let keys = assign_citation_keys(&clustered);
    let title = ctx.review_title();
    let gateway = &ctx.gateway;
    let sections = report
        .clusters
        .par_iter()
        .map(|c| {
            let mut members = c.member_ids.clone();
            members.sort_by_key(|id| rank.get(id.as_str()).copied().unwrap_or(usize::MAX));
            let aggregated = aggregate_topic(&members, &units, &keys)?;
            post_edit_section(gateway, &title, c.topic_id, &c.title, &aggregated)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ctx.write_json(SECTIONS_FILE, &SectionsCheckpoint { review_title: title, citation_keys: keys, sections })
}

fn assemble(ctx: &RunContext) -> Result<(), PipelineError> {
    let selected: Vec<SelectedRecord> = ctx.read_jsonl(SELECTED_FILE)?;
    let report: TopicReport = ctx.read_json(TOPICS_FILE)?;
    let sections: SectionsCheckpoint = ctx.read_json(SECTIONS_FILE)?;
    let framing = generate_framing_sections(&ctx.gateway, &sections.review_title, &report);
    let papers: Vec<&PaperRecord> = selected.iter().map(|s| &s.paper).collect();
    let bibliography = generate_bibtex(&papers, &sections.citation_keys);
    let outliers: BTreeSet<&str> = report.outlier_ids.iter().map(String::as_str).collect();
    let unclustered = selected
        .iter()
        .filter(|s| outliers.contains(s.paper.arxiv_id.as_str()))
        .map(|s| (s.paper.arxiv_id.clone(), s.paper.title.clone()))
        .collect();
    let review = ReviewDocument {
        title: format!("{}: An Automated Systematic Literature Review", sections.review_title),
        framing,
        sections: sections.sections,
        bibliography,
        unclustered,
    };
    assemble_and_export(&review, &ctx.dir)?;
    ctx.write_json(REVIEW_JSON_FILE, &review)
}

/// Plain texts of the four pipeline stages.
pub fn stage_texts(selected: &[SelectedRecord], units: &[SummaryUnit], review: &ReviewDocument) -> StageTexts {
    let join = |parts: Vec<String>| parts.join("\n");
    let sections: Vec<String> = review.sections.iter().map(|s| latex_to_plain(&s.post_edited_text)).collect();
    let mut body = vec![latex_to_plain(&review.framing.introduction), latex_to_plain(&review.framing.background)];
    body.extend(sections.iter().cloned());
    body.push(latex_to_plain(&review.framing.conclusion));
    StageTexts {
        abs: Some(join(selected.iter().map(|s| s.paper.abstract_clean.clone()).collect())),
        t5sum: Some(join(units.iter().map(|u| u.text.clone()).collect())),
        gpt_sec: Some(join(sections)),
        gpt_slr: Some(join(body)),
    }
}

fn evaluate(ctx: &RunContext) -> Result<(), PipelineError> {
    let report = compute_metrics(ctx)?;
    write_atomic(&ctx.path(METRICS_FILE), report.to_jsonl().as_bytes())?;
    Ok(())
}

/// Metrics over the run's checkpoints: cosine to the expanded topic per stage
/// plus the random control, ROUGE-1 against the selected abstracts, Flesch
/// Reading Ease, and topic statistics.
pub fn compute_metrics(ctx: &RunContext) -> Result<MetricsReport, PipelineError> {
    let e: ExpandCheckpoint = ctx.read_json(EXPAND_FILE)?;
    let retrieved = ctx.read_jsonl::<PaperRecord>(RETRIEVED_FILE)?.len();
    let selected: Vec<SelectedRecord> = ctx.read_jsonl(SELECTED_FILE)?;
    let topics: TopicReport = ctx.read_json(TOPICS_FILE)?;
    let units: Vec<SummaryUnit> = ctx.read_jsonl(SUMMARIES_FILE)?;
    let review: ReviewDocument = ctx.read_json(REVIEW_JSON_FILE)?;

    let texts = stage_texts(&selected, &units, &review);
    let topic = topic_embedding(ctx, &e.expanded_topic)?;
    let sims = stage_similarity_report(
        &topic,
        &texts,
        ctx.embedder.as_ref(),
        ctx.config.baseline_seed,
        ctx.config.baseline_words,
    )?;

    let mut m = MetricsReport::default();
    m.push("Corpus", "retrieved_count", retrieved as f64);
    m.push("Corpus", "selected_count", selected.len() as f64);
    m.push("Topics", "topic_count", topics.clusters.len() as f64);
    m.push("Topics", "outlier_count", topics.outlier_ids.len() as f64);
    m.push("Topics", "tuning_iterations", topics.iterations_used as f64);
    m.push("Topics", "min_topic_size", topics.params_used.min_topic_size as f64);
    if let Some(c) = topics.coherence {
        m.push("Topics", "coherence_cv", c);
    }
    for (label, value) in sims.rows() {
        m.push(label, "cosine", value);
    }

    let clustered: BTreeSet<&str> = topics.clusters.iter().flat_map(|c| c.member_ids.iter().map(String::as_str)).collect();
    let clustered_abstracts: Vec<&str> = selected
        .iter()
        .filter(|s| clustered.contains(s.paper.arxiv_id.as_str()))
        .map(|s| s.paper.abstract_clean.as_str())
        .collect();
    let all_abstracts = texts.abs.clone().unwrap_or_default();
    let rouge_rows = [
        ("T5Sum", texts.t5sum.as_deref().unwrap_or(""), all_abstracts.clone()),
        ("GPTSec", texts.gpt_sec.as_deref().unwrap_or(""), clustered_abstracts.join("\n")),
        ("GPTSLR", texts.gpt_slr.as_deref().unwrap_or(""), all_abstracts),
    ];
    for (label, candidate, reference) in &rouge_rows {
        let r = rouge1(candidate, reference);
        m.push(label, "rouge1_precision", r.precision);
        m.push(label, "rouge1_recall", r.recall);
        m.push(label, "rouge1_f1", r.f1);
    }
    for stage in crate::evaluation::TextStage::ALL {
        if let Some(Ok(stats)) = texts.get(stage).map(fres) {
            m.push(stage.label(), "fres", stats.fres);
        }
    }
    Ok(m)
}
