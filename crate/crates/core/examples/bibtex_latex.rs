//! Citation keys, BibTeX entries, LaTeX escaping and the structural validator.
use std::collections::BTreeSet;

use litreview::document::{
    assign_citation_keys, escape_latex, generate_bibtex, render_bibtex, sanitize_llm_text, validate_latex,
};
use litreview::search::PaperRecord;

fn paper(id: &str, author: &str, title: &str) -> PaperRecord {
    PaperRecord {
        arxiv_id: id.into(),
        title: title.into(),
        authors: vec![author.into()],
        published: "2023-01-09".into(),
        url: format!("http://arxiv.org/abs/{id}"),
        ..Default::default()
    }
}

fn main() {
    let papers = [
        paper("2301.04567v1", "José Müller", "Saliency & Attribution: 100% Faithful?"),
        paper("2301.04561v2", "Ana Müller", "A Second Paper by Another Müller"),
    ];
    let refs: Vec<_> = papers.iter().collect();
    let keys = assign_citation_keys(&refs);
    println!("{keys:?}\n");
    print!("{}", render_bibtex(&generate_bibtex(&refs, &keys)));

    println!("\n{}", escape_latex("costs $5 & ~10% of #runs_{x}"));
    let llm = "```latex\nShapley values help \\citep{muller20230456a}, 30% of the time & more.\n```";
    let clean = sanitize_llm_text(llm);
    println!("{clean}");

    let defined: BTreeSet<String> = keys.values().cloned().collect();
    let tex = format!("\\begin{{document}}\n{clean}\n\\end{{document}}\n");
    println!("valid: {:?}", validate_latex(&tex, &defined));
    println!("dangling: {:?}", validate_latex("\\citep{nobody1999}", &defined));
}
