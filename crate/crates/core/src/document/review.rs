use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bibtex::{render_bibtex, BibEntry};
use super::latex::{escape_latex, sanitize_llm_text, validate_latex};
use super::{write_atomic, DocumentError};
use crate::gateway::{bindings, Gateway, TemplateId};
use crate::synthesis::SectionDraft;
use crate::topics::TopicReport;

/// Base name of the exported pair; the .tex cites `\bibliography{review}`.
pub const OUTPUT_STEM: &str = "review";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramingTexts {
    pub introduction: String,
    pub background: String,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewDocument {
    pub title: String,
    pub framing: FramingTexts,
    pub sections: Vec<SectionDraft>,
    pub bibliography: Vec<BibEntry>,
    /// (arXiv id, title) of papers left outside every topic.
    pub unclustered: Vec<(String, String)>,
}

fn fallback_framing(report: &TopicReport) -> String {
    let titles: Vec<&str> = report.clusters.iter().map(|c| c.title.as_str()).collect();
    escape_latex(&format!("This review covers {} topics: {}.", titles.len(), titles.join("; ")))
}

/// Introduction, background and conclusion through the framing template.
/// A failed call is replaced by a one-line summary of the topics.
pub fn generate_framing_sections(gateway: &Gateway, title: &str, report: &TopicReport) -> FramingTexts {
    let titles = report.clusters.iter().map(|c| c.title.as_str()).collect::<Vec<_>>().join("; ");
    let papers = report.paper_count().to_string();
    let topics = report.clusters.len().to_string();
    let section = |name: &str| {
        let b = bindings([
            ("section", name),
            ("title", title),
            ("titles", titles.as_str()),
            ("paper_count", papers.as_str()),
            ("topic_count", topics.as_str()),
        ]);
        match gateway.complete_template(TemplateId::Framing, b, None) {
            Ok(text) => sanitize_llm_text(&text),
            Err(e) => {
                log::warn!("framing {name} failed ({e}); using template text");
                fallback_framing(report)
            }
        }
    };
    FramingTexts {
        introduction: section("introduction"),
        background: section("background"),
        conclusion: section("conclusion"),
    }
}

const PREAMBLE: &str = "\\documentclass[11pt]{article}
\\usepackage[utf8]{inputenc}
\\usepackage[T1]{fontenc}
\\usepackage[round]{natbib}
\\usepackage{hyperref}
";

impl ReviewDocument {
    pub fn render_tex(&self) -> String {
        let mut s = String::from(PREAMBLE);
        s.push_str(&format!("\n\\title{{{}}}\n\\author{{}}\n\\date{{}}\n\n\\begin{{document}}\n\\maketitle\n", escape_latex(&self.title)));
        let mut section = |heading: &str, label: &str, body: &str| {
            s.push_str(&format!("\n\\section{{{heading}}}\n\\label{{sec:{label}}}\n{}\n", body.trim()));
        };
        section("Introduction", "introduction", &self.framing.introduction);
        section("Background", "background", &self.framing.background);
        for d in &self.sections {
            section(&escape_latex(&d.section_title), &format!("topic-{}", d.topic_id), &d.post_edited_text);
        }
        section("Conclusion", "conclusion", &self.framing.conclusion);
        if !self.unclustered.is_empty() {
            s.push_str("\n\\appendix\n\\section{Unclustered papers}\n\\label{sec:unclustered}\n");
            s.push_str("Papers selected for the review that no topic absorbed.\n\\begin{itemize}\n");
            for (id, title) in &self.unclustered {
                s.push_str(&format!("  \\item {} (arXiv:{})\n", escape_latex(title), escape_latex(id)));
            }
            s.push_str("\\end{itemize}\n");
        }
        s.push_str(&format!("\n\\bibliographystyle{{plainnat}}\n\\bibliography{{{OUTPUT_STEM}}}\n\n\\end{{document}}\n"));
        s
    }

    pub fn render_bib(&self) -> String {
        render_bibtex(&self.bibliography)
    }

    pub fn validate(&self) -> Result<String, DocumentError> {
        let tex = self.render_tex();
        let defined: BTreeSet<String> = self.bibliography.iter().map(|e| e.key.clone()).collect();
        validate_latex(&tex, &defined)?;
        Ok(tex)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFiles {
    pub tex: PathBuf,
    pub bib: PathBuf,
}

/// Validates, then writes `review.tex` and `review.bib` atomically.
pub fn assemble_and_export(review: &ReviewDocument, out_dir: &Path) -> Result<ExportedFiles, DocumentError> {
    let tex = review.validate()?;
    let files = ExportedFiles {
        tex: out_dir.join(format!("{OUTPUT_STEM}.tex")),
        bib: out_dir.join(format!("{OUTPUT_STEM}.bib")),
    };
    write_atomic(&files.bib, review.render_bib().as_bytes())?;
    write_atomic(&files.tex, tex.as_bytes())?;
    Ok(files)
}
