use crate::gateway::{bindings, single_line, Gateway, TemplateId};

use super::{TopicCluster, TopicError};

pub const MAX_TITLE_WORDS: usize = 12;

fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

fn truncate_words(s: &str, n: usize) -> String {
    s.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

/// Asks the gateway for a section title for every non-outlier cluster.
///
/// A title over [`MAX_TITLE_WORDS`] words gets one corrective retry, then is
/// truncated.
pub fn title_topics(gateway: &Gateway, clusters: &mut [TopicCluster]) -> Result<(), TopicError> {
    for cluster in clusters.iter_mut() {
        if cluster.keywords.is_empty() {
            return Err(TopicError::NoKeywords(cluster.topic_id));
        }
        let keywords = cluster.keywords.iter().map(|k| k.0.as_str()).collect::<Vec<_>>().join(", ");
        let b = bindings([("topic_keywords", keywords.as_str())]);
        let mut title = single_line(&gateway.complete_template(TemplateId::TopicTitle, b.clone(), None)?);
        if word_count(&title) > MAX_TITLE_WORDS {
            log::warn!("topic {} title too long ({} words), retrying", cluster.topic_id, word_count(&title));
            let note = format!("The title must have at most {MAX_TITLE_WORDS} words.");
            title = single_line(&gateway.complete_template(TemplateId::TopicTitle, b, Some(note))?);
            if word_count(&title) > MAX_TITLE_WORDS {
                title = truncate_words(&title, MAX_TITLE_WORDS);
            }
        }
        cluster.title = title;
    }
    Ok(())
}
