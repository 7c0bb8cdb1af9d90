//! Topic expansion and query generation through the deterministic mock backend.
use litreview::gateway::{expand_topic, generate_search_query, Gateway};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gateway = Gateway::mock(0);
    let expanded = expand_topic(&gateway, "Explainable Artificial Intelligence")?;
    println!("expanded: {expanded}");
    let query = generate_search_query(&gateway, &expanded)?;
    println!("query:    {query}");
    Ok(())
}
