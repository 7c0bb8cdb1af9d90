use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::latex::escape_latex;
use crate::search::PaperRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibEntry {
    pub key: String,
    pub entry_type: String,
    pub title: String,
    pub authors: Vec<String>,
    pub year: String,
    pub eprint: String,
    pub url: String,
}

impl BibEntry {
    pub fn from_paper(key: &str, paper: &PaperRecord) -> Self {
        let url = if paper.url.is_empty() { format!("https://arxiv.org/abs/{}", paper.arxiv_id) } else { paper.url.clone() };
        Self {
            key: key.to_string(),
            entry_type: "article".to_string(),
            title: paper.title.clone(),
            authors: paper.authors.clone(),
            year: paper.year().map(|y| format!("{y:04}")).unwrap_or_else(|| "0000".into()),
            eprint: paper.arxiv_id.clone(),
            url,
        }
    }

    /// Field values are escaped for LaTeX except the URL, which BibTeX
    /// styles typeset verbatim.
    pub fn to_bibtex(&self) -> String {
        let authors = if self.authors.is_empty() {
            "Anonymous".to_string()
        } else {
            self.authors.iter().map(|a| escape_latex(a)).collect::<Vec<_>>().join(" and ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "@{}{{{},", self.entry_type, self.key);
        let _ = writeln!(s, "  title = {{{}}},", escape_latex(&self.title));
        let _ = writeln!(s, "  author = {{{authors}}},");
        let _ = writeln!(s, "  journal = {{arXiv preprint arXiv:{}}},", escape_latex(&self.eprint));
        let _ = writeln!(s, "  year = {{{}}},", self.year);
        let _ = writeln!(s, "  eprint = {{{}}},", escape_latex(&self.eprint));
        let _ = writeln!(s, "  archivePrefix = {{arXiv}},");
        let _ = writeln!(s, "  url = {{{}}}", self.url);
        s.push_str("}\n");
        s
    }
}

/// One `@article` per paper that has a key, sorted by key.
pub fn generate_bibtex(papers: &[&PaperRecord], keys: &BTreeMap<String, String>) -> Vec<BibEntry> {
    let mut entries: Vec<BibEntry> =
        papers.iter().filter_map(|p| keys.get(&p.arxiv_id).map(|k| BibEntry::from_paper(k, p))).collect();
    entries.sort_by(|a, b| a.key.cmp(&b.key));
    entries.dedup_by(|a, b| a.key == b.key);
    entries
}

pub fn render_bibtex(entries: &[BibEntry]) -> String {
    entries.iter().map(BibEntry::to_bibtex).collect::<Vec<_>>().join("\n")
}
