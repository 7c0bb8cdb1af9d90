//! Paged retrieval against a bundled Atom feed.
use litreview::search::{fetch_papers, fixtures, FixtureFeedSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = FixtureFeedSource::from_feed(fixtures::feed("vr").expect("bundled"))?;
    let papers = fetch_papers(&source, "all:\"virtual reality\"", 25)?;
    println!("{} papers in {} requests", papers.len(), source.request_count());
    for p in papers.iter().take(5) {
        println!("{}  {}  ({})", p.arxiv_id, p.title, p.authors.join(", "));
    }
    Ok(())
}
