//! Retrieval and relevance screening.
//!
//! Queries are validated against [`query::parse_arxiv_query`], fetched page by
//! page from a [`FeedSource`], cleaned, embedded, and ranked by cosine
//! similarity to the expanded topic.

pub mod arxiv;
pub mod clean;
pub mod corpus;
pub mod embed;
pub mod fixtures;
pub mod query;
pub mod screen;

use thiserror::Error;

pub use arxiv::{fetch_papers, parse_feed, FeedSource, FixtureFeedSource, HttpFeedSource, ARXIV_API_URL, PAGE_SIZE};
pub use clean::clean_text;
pub use corpus::{Corpus, PaperRecord, ScoredPaper};
pub use embed::{embed_texts, embedding_input, EmbeddingProvider, EmbeddingVector, HttpEmbedder, StubEmbedder};
pub use query::{parse_arxiv_query, QueryNode};
pub use screen::{cosine_similarity, filter_top_k, top_k};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("malformed query at byte {position}: {reason}")]
    MalformedQuery { position: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("feed parse error: {0}")]
    FeedParse(String),
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    EmbeddingDimMismatch { expected: usize, found: usize },
    #[error("vector dimensions differ: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("corpus invariant violated: {0}")]
    CorpusInvariant(String),
}
