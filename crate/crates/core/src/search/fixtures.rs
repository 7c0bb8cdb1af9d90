//! Recorded arXiv feeds used by mock mode, the examples and the tests.
//!
//! Five synthetic corpora of 60 papers each, one per reference topic. Each
//! corpus mixes five subthemes of twelve papers.

/// (name, raw topic, feed XML)
pub const FEEDS: [(&str, &str, &str); 5] = [
    ("xai", "Explainable Artificial Intelligence", include_str!("../../fixtures/feeds/xai.xml")),
    ("vr", "Virtual Reality", include_str!("../../fixtures/feeds/vr.xml")),
    ("blockchain", "Blockchain", include_str!("../../fixtures/feeds/blockchain.xml")),
    ("llm", "Large Language Models", include_str!("../../fixtures/feeds/llm.xml")),
    ("nmt", "Neural Machine Translation", include_str!("../../fixtures/feeds/nmt.xml")),
];

pub fn feed(name: &str) -> Option<&'static str> {
    FEEDS.iter().find(|f| f.0 == name).map(|f| f.2)
}

pub fn topic(name: &str) -> Option<&'static str> {
    FEEDS.iter().find(|f| f.0 == name).map(|f| f.1)
}

/// Picks the fixture whose topic best matches `raw_topic`: an exact name or
/// topic match, otherwise the one sharing the most words, otherwise `xai`.
pub fn fixture_for_topic(raw_topic: &str) -> &'static str {
    let lower = raw_topic.to_lowercase();
    if let Some(f) = FEEDS.iter().find(|f| f.0 == lower || f.1.to_lowercase() == lower) {
        return f.0;
    }
    let words: Vec<&str> = lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).collect();
    FEEDS
        .iter()
        .map(|f| {
            let t = f.1.to_lowercase();
            (words.iter().filter(|w| t.split(' ').any(|x| x == **w)).count(), f.0)
        })
        .filter(|(n, _)| *n > 0)
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
        .map(|(_, name)| name)
        .unwrap_or("xai")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert!(feed("vr").is_some());
        assert!(feed("nope").is_none());
        assert_eq!(fixture_for_topic("Blockchain"), "blockchain");
        assert_eq!(fixture_for_topic("virtual reality headsets"), "vr");
        assert_eq!(fixture_for_topic("nmt"), "nmt");
        assert_eq!(fixture_for_topic("cooking"), "xai");
    }
}
