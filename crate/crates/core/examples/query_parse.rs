//! Parses an arXiv search query and lists its field-qualified terms.
use litreview::search::parse_arxiv_query;

fn main() {
    let input = std::env::args()
        .nth(1)
        .unwrap_or_else(|| r#"ti:"explainable AI" AND (abs:interpretability OR abs:saliency) ANDNOT ti:survey"#.into());
    match parse_arxiv_query(&input) {
        Ok(node) => {
            println!("{node:#?}");
            for (text, field) in node.terms() {
                println!("term {text:?} in {}", field.map_or("all", |f| f.prefix()));
            }
        }
        Err(e) => {
            eprintln!("rejected: {e}");
            std::process::exit(1);
        }
    }
}
