//! Automated systematic literature review pipeline.
//!
//! The crate is organised the way a review is produced:
//!
//! - [`gateway`]: every language-model call goes through here, with the prompt
//!   templates shipped as plain-text assets and interchangeable remote and
//!   deterministic mock backends.
//! - [`search`]: arXiv query grammar, Atom feed retrieval with pagination,
//!   abstract cleaning, embeddings and cosine top-K screening.
//! - [`topics`]: neighbour-graph dimensionality reduction, density clustering,
//!   topic-count tuning, class-based keyword weighting and topic titles.
//! - [`synthesis`]: per-abstract summaries, topic aggregation with citation
//!   markers, and citation-preserving post-editing.
//! - [`document`]: citation keys, BibTeX, and the LaTeX review with a
//!   structural validator.
//! - [`evaluation`]: ROUGE-1, Flesch Reading Ease, C_v topic coherence, stage
//!   similarity reports with a random-word control, and the document-limit sweep.
//! - [`pipeline`]: configuration, the nine checkpointed stages, resume and
//!   run manifests.
//!
//! The runnable programs under `examples/` walk through each capability; the
//! `litreview` binary is a thin CLI over [`pipeline`].

pub mod document;
pub mod evaluation;
pub mod gateway;
pub mod lexicon;
pub mod pipeline;
pub mod search;
pub mod synthesis;
pub mod topics;

mod error;

pub use error::{Error, Result};
