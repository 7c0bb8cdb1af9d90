//! Citation keys, BibTeX, and the LaTeX review document.

pub mod bibtex;
pub mod citekey;
pub mod latex;
pub mod review;

use std::io::Write;
use std::path::Path;

use thiserror::Error;

pub use bibtex::{generate_bibtex, render_bibtex, BibEntry};
pub use citekey::{assign_citation_keys, make_citation_key};
pub use latex::{escape_latex, extract_citations, latex_to_plain, sanitize_llm_text, validate_latex};
pub use review::{assemble_and_export, generate_framing_sections, ExportedFiles, FramingTexts, ReviewDocument};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("citation key {0} has no bibliography entry")]
    UndefinedCitation(String),
    #[error("unbalanced LaTeX: {0}")]
    UnbalancedEnvironment(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Writes through a temporary file in the same directory, then renames it
/// over `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
