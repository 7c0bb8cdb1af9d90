//! Clusters a fixture corpus into titled topics and scores their coherence.
use litreview::evaluation::{coherence_cv, DEFAULT_WINDOW};
use litreview::gateway::Gateway;
use litreview::search::{embed_texts, embedding_input, fetch_papers, fixtures, FixtureFeedSource, StubEmbedder};
use litreview::topics::{model_topics, TopicModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = FixtureFeedSource::from_feed(fixtures::feed("llm").expect("bundled"))?;
    let papers = fetch_papers(&source, "all:llm", 100)?;
    let ids: Vec<String> = papers.iter().map(|p| p.arxiv_id.clone()).collect();
    let texts: Vec<String> = papers.iter().map(|p| p.abstract_clean.clone()).collect();
    let inputs: Vec<String> = papers.iter().map(embedding_input).collect();
    let embeddings: Vec<Vec<f64>> = embed_texts(&inputs, &StubEmbedder)?.into_iter().map(|v| v.values).collect();

    let params = TopicModelParams::for_corpus(papers.len());
    let report = model_topics(&Gateway::mock(0), &ids, &embeddings, &texts, &params, 42)?;
    println!("{} topics after {} tuning iterations, {} outliers", report.clusters.len(), report.iterations_used, report.outlier_ids.len());
    for c in &report.clusters {
        let words: Vec<&str> = c.keywords.iter().take(5).map(|k| k.0.as_str()).collect();
        println!("[{}] {} ({} papers): {}", c.topic_id, c.title, c.member_ids.len(), words.join(", "));
    }
    let keyword_lists: Vec<Vec<String>> =
        report.clusters.iter().map(|c| c.keywords.iter().map(|k| k.0.clone()).collect()).collect();
    println!("C_v = {:.3}", coherence_cv(&keyword_lists, &texts, DEFAULT_WINDOW)?);
    Ok(())
}
