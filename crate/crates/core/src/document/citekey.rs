use std::collections::BTreeMap;

use deunicode::deunicode;

use crate::search::PaperRecord;

/// Lowercase ASCII letters of the first author's surname (last name token).
fn surname(paper: &PaperRecord) -> Option<String> {
    let author = paper.authors.first()?;
    let last = author.split_whitespace().last()?;
    let s: String = deunicode(last).chars().filter(char::is_ascii_alphabetic).map(|c| c.to_ascii_lowercase()).collect();
    (!s.is_empty()).then_some(s)
}

/// First four digits of the arXiv sequence number: the part after the dot for
/// new-style ids ("2301.04567" gives "0456"), after the slash for old-style ones.
fn id_digits(arxiv_id: &str) -> String {
    let tail = arxiv_id.rsplit(['.', '/']).next().unwrap_or(arxiv_id);
    let tail = tail.split('v').next().unwrap_or(tail);
    tail.chars().filter(char::is_ascii_digit).take(4).collect()
}

/// `surname + year + id digits`, before collision handling. Missing authors
/// give "anon" and a missing year gives "0000", each with a warning.
pub fn make_citation_key(paper: &PaperRecord) -> String {
    let name = surname(paper).unwrap_or_else(|| {
        log::warn!("{}: no usable author, citation key falls back to anon", paper.arxiv_id);
        "anon".to_string()
    });
    let year = match paper.year() {
        Some(y) => format!("{y:04}"),
        None => {
            log::warn!("{}: no publication year", paper.arxiv_id);
            "0000".to_string()
        }
    };
    format!("{name}{year}{}", id_digits(&paper.arxiv_id))
}

/// Unique key per paper id. Papers sharing a base key all get a suffix a, b,
/// c... in arXiv id order, so the result does not depend on input order.
pub fn assign_citation_keys(papers: &[&PaperRecord]) -> BTreeMap<String, String> {
    let mut by_base: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for p in papers {
        by_base.entry(make_citation_key(p)).or_default().push(&p.arxiv_id);
    }
    let mut keys = BTreeMap::new();
    for (base, mut ids) in by_base {
        ids.sort_unstable();
        ids.dedup();
        if ids.len() == 1 {
            keys.insert(ids[0].to_string(), base);
            continue;
        }
        for (i, id) in ids.into_iter().enumerate() {
            keys.insert(id.to_string(), format!("{base}{}", suffix(i)));
        }
    }
    keys
}

/// a..z, then aa, ab, ...
fn suffix(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}
