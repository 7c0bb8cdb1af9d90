//! Extractive summaries, topic aggregation and mock post-editing.
use std::collections::BTreeMap;

use litreview::document::assign_citation_keys;
use litreview::gateway::Gateway;
use litreview::search::{fetch_papers, fixtures, FixtureFeedSource};
use litreview::synthesis::{aggregate_topic, post_edit_section, summarize_abstract, ExtractiveSummarizer, SummaryBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = FixtureFeedSource::from_feed(fixtures::feed("nmt").expect("bundled"))?;
    let papers = fetch_papers(&source, "all:translation", 4)?;
    let refs: Vec<_> = papers.iter().collect();
    let keys = assign_citation_keys(&refs);
    let mut units = BTreeMap::new();
    for p in &papers {
        let unit = summarize_abstract(p, &ExtractiveSummarizer, &SummaryBudget::default(), true)?;
        println!("{} ({} tokens): {}\n", keys[&p.arxiv_id], unit.token_count, unit.text);
        units.insert(p.arxiv_id.clone(), unit);
    }
    let ids: Vec<String> = papers.iter().map(|p| p.arxiv_id.clone()).collect();
    let aggregated = aggregate_topic(&ids, &units, &keys)?;
    let draft = post_edit_section(&Gateway::mock(0), "Neural Machine Translation", 0, "Translation Models", &aggregated)?;
    println!("post-edited:\n{}\ncites {:?}", draft.post_edited_text, draft.citation_keys);
    Ok(())
}
