//! arXiv export API retrieval: Atom parsing, pagination and deduplication.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use roxmltree::{Document, Node};

use super::clean::clean_text;
use super::corpus::PaperRecord;
use super::query::parse_arxiv_query;
use super::SearchError;

pub const ARXIV_API_URL: &str = "http://export.arxiv.org/api/query";
pub const PAGE_SIZE: usize = 100;
pub const MAX_RESULTS_CAP: usize = 3000;
/// Pause between live page requests, per arXiv API etiquette.
pub const LIVE_PAGE_DELAY: Duration = Duration::from_secs(3);

const ATOM_NS: &str = "http://www.w3.org/2005/Atom";
const ARXIV_NS: &str = "http://arxiv.org/schemas/atom";
const OPENSEARCH_NS: &str = "http://a9.com/-/spec/opensearch/1.1/";

/// One page of the feed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedPage {
    pub total_results: Option<usize>,
    pub entries: Vec<PaperRecord>,
}

pub trait FeedSource {
    /// Raw Atom XML for `search_query` with the given `start` and `max_results`.
    fn fetch_page(&self, query: &str, start: usize, max_results: usize) -> Result<String, SearchError>;

    /// Pause before every request after the first.
    fn page_delay(&self) -> Duration {
        Duration::ZERO
    }
}

pub struct HttpFeedSource {
    base_url: String,
    agent: ureq::Agent,
    delay: Duration,
}

impl Default for HttpFeedSource {
    fn default() -> Self {
        Self::new(ARXIV_API_URL)
    }
}

impl HttpFeedSource {
    pub fn new(base_url: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self { base_url: base_url.to_string(), agent, delay: LIVE_PAGE_DELAY }
    }
}

impl FeedSource for HttpFeedSource {
    fn fetch_page(&self, query: &str, start: usize, max_results: usize) -> Result<String, SearchError> {
        let mut resp = self
            .agent
            .get(&self.base_url)
            .query("search_query", query)
            .query("start", start.to_string())
            .query("max_results", max_results.to_string())
            .call()
            .map_err(|e| SearchError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| SearchError::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(SearchError::Network(format!("HTTP {status}")));
        }
        Ok(body)
    }

    fn page_delay(&self) -> Duration {
        self.delay
    }
}

/// Serves a recorded feed page by page and counts requests. The query text is
/// validated upstream but otherwise ignored.
pub struct FixtureFeedSource {
    entries: Vec<String>,
    requests: AtomicUsize,
}

impl FixtureFeedSource {
    /// Takes the `<entry>` elements of a complete Atom feed.
    pub fn from_feed(xml: &str) -> Result<Self, SearchError> {
        let doc = Document::parse(xml).map_err(|e| SearchError::FeedParse(e.to_string()))?;
        let entries = doc
            .root_element()
            .children()
            .filter(|n| n.has_tag_name((ATOM_NS, "entry")))
            .map(|n| xml[n.range()].to_string())
            .collect();
        Ok(Self { entries, requests: AtomicUsize::new(0) })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only the first `n` entries, repeating the feed if it is shorter.
    pub fn resized(mut self, n: usize) -> Self {
        if !self.entries.is_empty() {
            self.entries = self.entries.iter().cycle().take(n).cloned().collect();
        }
        self
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl FeedSource for FixtureFeedSource {
    fn fetch_page(&self, _query: &str, start: usize, max_results: usize) -> Result<String, SearchError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let slice = self.entries.iter().skip(start).take(max_results);
        let mut xml = String::from(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<feed xmlns=\"http://www.w3.org/2005/Atom\" \
             xmlns:opensearch=\"http://a9.com/-/spec/opensearch/1.1/\" xmlns:arxiv=\"http://arxiv.org/schemas/atom\">\n",
        );
        xml.push_str(&format!("  <opensearch:totalResults>{}</opensearch:totalResults>\n", self.entries.len()));
        xml.push_str(&format!("  <opensearch:startIndex>{start}</opensearch:startIndex>\n"));
        for e in slice {
            xml.push_str("  ");
            xml.push_str(e);
            xml.push('\n');
        }
        xml.push_str("</feed>\n");
        Ok(xml)
    }
}

fn child<'a, 'i>(node: Node<'a, 'i>, ns: &str, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name((ns, name)))
}

fn text_of(node: Node, ns: &str, name: &str) -> String {
    child(node, ns, name).and_then(|n| n.text()).unwrap_or("").to_string()
}

fn parse_entry(entry: Node) -> Result<PaperRecord, SearchError> {
    let id_url = text_of(entry, ATOM_NS, "id");
    if id_url.contains("/api/errors") {
        return Err(SearchError::FeedParse(format!("arXiv error: {}", text_of(entry, ATOM_NS, "summary").trim())));
    }
    let arxiv_id = match id_url.split_once("/abs/") {
        Some((_, id)) => id.trim().to_string(),
        None => return Err(SearchError::FeedParse(format!("unexpected entry id {id_url:?}"))),
    };
    let published = text_of(entry, ATOM_NS, "published");
    let published = published.trim().get(..10).unwrap_or("").to_string();
    let authors = entry
        .children()
        .filter(|n| n.has_tag_name((ATOM_NS, "author")))
        .filter_map(|a| child(a, ATOM_NS, "name").and_then(|n| n.text()))
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| !s.is_empty())
        .collect();
    let primary_category = child(entry, ARXIV_NS, "primary_category")
        .or_else(|| child(entry, ATOM_NS, "category"))
        .and_then(|n| n.attribute("term"))
        .unwrap_or("")
        .to_string();
    let url = entry
        .children()
        .find(|n| n.has_tag_name((ATOM_NS, "link")) && n.attribute("rel") == Some("alternate"))
        .and_then(|n| n.attribute("href"))
        .map(str::to_string)
        .unwrap_or_else(|| id_url.trim().to_string());
    let abstract_raw = text_of(entry, ATOM_NS, "summary").trim().to_string();
    Ok(PaperRecord {
        arxiv_id,
        title: clean_text(&text_of(entry, ATOM_NS, "title")),
        abstract_clean: clean_text(&abstract_raw),
        abstract_raw,
        authors,
        published,
        primary_category,
        url,
    })
}

pub fn parse_feed(xml: &str) -> Result<FeedPage, SearchError> {
    let doc = Document::parse(xml).map_err(|e| SearchError::FeedParse(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name((ATOM_NS, "feed")) {
        return Err(SearchError::FeedParse(format!("root element is <{}>", root.tag_name().name())));
    }
    let total_results = child(root, OPENSEARCH_NS, "totalResults").and_then(|n| n.text()).and_then(|t| t.trim().parse().ok());
    let entries = root
        .children()
        .filter(|n| n.has_tag_name((ATOM_NS, "entry")))
        .map(parse_entry)
        .collect::<Result<_, _>>()?;
    Ok(FeedPage { total_results, entries })
}

/// Retrieves up to `max_results` papers for `query`, `PAGE_SIZE` at a time.
///
/// Stops at `max_results`, at a short or empty page, or when `start` passes
/// the feed's advertised total. Duplicate ids keep their first occurrence;
/// records whose cleaned abstract is empty are dropped with a warning.
pub fn fetch_papers(source: &dyn FeedSource, query: &str, max_results: usize) -> Result<Vec<PaperRecord>, SearchError> {
    parse_arxiv_query(query)?;
    if !(1..=MAX_RESULTS_CAP).contains(&max_results) {
        return Err(SearchError::InvalidArgument(format!("max_results must be in 1..={MAX_RESULTS_CAP}, got {max_results}")));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let want = PAGE_SIZE.min(max_results - start);
        if start > 0 {
            std::thread::sleep(source.page_delay());
        }
        let page = parse_feed(&source.fetch_page(query, start, want)?)?;
        let got = page.entries.len();
        for rec in page.entries {
            if rec.abstract_clean.is_empty() {
                log::warn!("dropping {}: empty abstract", rec.arxiv_id);
                continue;
            }
            if seen.insert(rec.arxiv_id.clone()) {
                out.push(rec);
            }
        }
        start += got;
        let exhausted = got < want || page.total_results.is_some_and(|t| start >= t);
        if exhausted || start >= max_results {
            break;
        }
    }
    out.truncate(max_results);
    if out.is_empty() {
        log::warn!("query {query:?} returned no papers");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::fixtures;

    fn source(n: usize) -> FixtureFeedSource {
        FixtureFeedSource::from_feed(fixtures::feed("xai").unwrap()).unwrap().resized(n)
    }

    #[test]
    fn five_entries() {
        let s = source(5);
        let got = fetch_papers(&s, "ti:x", 3000).unwrap();
        assert_eq!(got.len(), 5);
        assert_eq!(s.request_count(), 1);
    }

    #[test]
    fn pagination_counts() {
        let xml = synthetic_feed(250);
        let s = FixtureFeedSource::from_feed(&xml).unwrap();
        let got = fetch_papers(&s, "ti:x", 200).unwrap();
        assert_eq!(got.len(), 200);
        assert_eq!(s.request_count(), 2);

        let s = FixtureFeedSource::from_feed(&xml).unwrap();
        let got = fetch_papers(&s, "ti:x", 250).unwrap();
        assert_eq!(got.len(), 250);
        assert_eq!(s.request_count(), 3);

        let s = FixtureFeedSource::from_feed(&xml).unwrap();
        assert_eq!(fetch_papers(&s, "ti:x", 3000).unwrap().len(), 250);
        assert_eq!(s.request_count(), 3);
    }

    #[test]
    fn dedup_keeps_first() {
        let s = source(120);
        let got = fetch_papers(&s, "ti:x", 3000).unwrap();
        assert_eq!(got.len(), 60);
        let ids: HashSet<_> = got.iter().map(|p| &p.arxiv_id).collect();
        assert_eq!(ids.len(), 60);
    }

    #[test]
    fn empty_feed() {
        let s = FixtureFeedSource::from_feed(&synthetic_feed(0)).unwrap();
        assert!(fetch_papers(&s, "ti:nothing", 10).unwrap().is_empty());
    }

    #[test]
    fn bad_arguments() {
        let s = source(5);
        assert!(matches!(fetch_papers(&s, "ti:\"x", 10), Err(SearchError::MalformedQuery { .. })));
        assert!(matches!(fetch_papers(&s, "ti:x", 0), Err(SearchError::InvalidArgument(_))));
        assert!(matches!(fetch_papers(&s, "ti:x", 3001), Err(SearchError::InvalidArgument(_))));
        assert_eq!(s.request_count(), 0);
    }

    #[test]
    fn entry_fields() {
        let page = parse_feed(fixtures::feed("xai").unwrap()).unwrap();
        assert_eq!(page.total_results, Some(60));
        let p = &page.entries[0];
        assert_eq!(p.arxiv_id, "1901.13004v1");
        assert_eq!(p.published, "2019-01-01");
        assert_eq!(p.primary_category, "cs.LG");
        assert_eq!(p.authors, ["Olga Haddad", "Olga O'Brien", "Aisha Iyer"]);
        assert_eq!(p.url, "http://arxiv.org/abs/1901.13004v1");
        assert!(p.abstract_raw.contains("\\emph{fidelity}"));
        assert!(p.abstract_clean.contains("measured by fidelity."));
        assert!(!p.abstract_clean.contains('\n'));
    }

    #[test]
    fn error_feed_and_garbage() {
        let err = r#"<feed xmlns="http://www.w3.org/2005/Atom"><entry><id>http://arxiv.org/api/errors#x</id>
            <title>Error</title><summary>incorrect id format</summary></entry></feed>"#;
        assert!(matches!(parse_feed(err), Err(SearchError::FeedParse(m)) if m.contains("incorrect id")));
        assert!(matches!(parse_feed("<html/>"), Err(SearchError::FeedParse(_))));
        assert!(matches!(parse_feed("not xml"), Err(SearchError::FeedParse(_))));
    }

    fn synthetic_feed(n: usize) -> String {
        let mut xml = String::from(r#"<feed xmlns="http://www.w3.org/2005/Atom">"#);
        for i in 0..n {
            xml.push_str(&format!(
                "<entry><id>http://arxiv.org/abs/2401.{i:05}v1</id><published>2024-01-01T00:00:00Z</published>\
                 <title>Paper {i}</title><summary>Abstract {i}.</summary><author><name>A B</name></author></entry>"
            ));
        }
        xml.push_str("</feed>");
        xml
    }
}
