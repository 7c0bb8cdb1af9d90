//! Cosine top-K screening with the hashing embedder.
use litreview::search::{
    embed_texts, embedding_input, filter_top_k, fetch_papers, fixtures, FixtureFeedSource, StubEmbedder,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = FixtureFeedSource::from_feed(fixtures::feed("blockchain").expect("bundled"))?;
    let papers = fetch_papers(&source, "all:blockchain", 100)?;
    let topic = "Blockchain, distributed ledger technology, smart contracts";
    let inputs: Vec<String> = std::iter::once(topic.to_string()).chain(papers.iter().map(embedding_input)).collect();
    let mut vectors = embed_texts(&inputs, &StubEmbedder)?;
    let topic_vec = vectors.remove(0);
    let pairs: Vec<_> = papers.into_iter().zip(vectors).collect();
    for s in filter_top_k(&topic_vec, &pairs, 10)? {
        println!("{:.3}  {}", s.similarity, s.paper.title);
    }
    Ok(())
}
