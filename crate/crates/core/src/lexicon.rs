//! Bundled word lists.
//!
//! Both lists are frozen in `assets/` so keyword extraction, stub embeddings and
//! the random-word baseline are reproducible across machines.

use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS_RAW: &str = include_str!("../assets/stopwords_en.txt");
const LEXICON_RAW: &str = include_str!("../assets/lexicon_en.txt");

/// English stopword list (318 entries).
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_RAW.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// The 10,000-word lexicon used for random-word control documents, sorted.
pub fn lexicon() -> &'static [&'static str] {
    static WORDS: OnceLock<Vec<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| LEXICON_RAW.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_sizes() {
        assert_eq!(stopwords().len(), 318);
        assert_eq!(lexicon().len(), 10_000);
    }

    #[test]
    fn lexicon_is_sorted_and_unique() {
        let words = lexicon();
        assert!(words.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn common_stopwords() {
        for w in ["the", "and", "of", "a", "is"] {
            assert!(is_stopword(w), "{w}");
        }
        assert!(!is_stopword("graph"));
    }
}
