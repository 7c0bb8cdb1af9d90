//! Prompt templates.
//!
//! Templates use a small format-string syntax: `{name}` is a placeholder
//! (`name` is `[a-z_]+`), `{{` and `}}` are literal braces. The texts live in
//! `assets/prompts/` and are compiled into the binary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GatewayError;

pub type Bindings = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    TopicExpansion,
    QueryGeneration,
    TopicTitle,
    PostEdit,
    /// Introduction, background and conclusion prose. Not one of the four
    /// search/synthesis prompts; added for the review's framing sections.
    Framing,
}

impl TemplateId {
    pub const ALL: [TemplateId; 5] = [
        TemplateId::TopicExpansion,
        TemplateId::QueryGeneration,
        TemplateId::TopicTitle,
        TemplateId::PostEdit,
        TemplateId::Framing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::TopicExpansion => "topic_expansion",
            TemplateId::QueryGeneration => "query_generation",
            TemplateId::TopicTitle => "topic_title",
            TemplateId::PostEdit => "post_edit",
            TemplateId::Framing => "framing",
        }
    }

    pub fn template(self) -> &'static PromptTemplate {
        &TEMPLATES[self as usize]
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| GatewayError::UnknownTemplate(s.to_string()))
    }
}

#[derive(Debug)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub system_text: &'static str,
    pub user_text: &'static str,
}

static TEMPLATES: [PromptTemplate; 5] = [
    PromptTemplate {
        id: TemplateId::TopicExpansion,
        system_text: include_str!("../../assets/prompts/topic_expansion.system.txt"),
        user_text: include_str!("../../assets/prompts/topic_expansion.user.txt"),
    },
    PromptTemplate {
        id: TemplateId::QueryGeneration,
        system_text: include_str!("../../assets/prompts/query_generation.system.txt"),
        user_text: include_str!("../../assets/prompts/query_generation.user.txt"),
    },
    PromptTemplate {
        id: TemplateId::TopicTitle,
        system_text: include_str!("../../assets/prompts/topic_title.system.txt"),
        user_text: include_str!("../../assets/prompts/topic_title.user.txt"),
    },
    PromptTemplate {
        id: TemplateId::PostEdit,
        system_text: include_str!("../../assets/prompts/post_edit.system.txt"),
        user_text: include_str!("../../assets/prompts/post_edit.user.txt"),
    },
    PromptTemplate {
        id: TemplateId::Framing,
        system_text: include_str!("../../assets/prompts/framing.system.txt"),
        user_text: include_str!("../../assets/prompts/framing.user.txt"),
    },
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece<'a> {
    Literal(&'a str),
    Brace(char),
    Placeholder(&'a str),
}

/// Splits a template into literal runs, escaped braces and placeholders.
fn pieces(text: &str) -> Result<Vec<Piece<'_>>, GatewayError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' | b'}' if bytes.get(i + 1) == Some(&bytes[i]) => {
                if start < i {
                    out.push(Piece::Literal(&text[start..i]));
                }
                out.push(Piece::Brace(bytes[i] as char));
                i += 2;
                start = i;
            }
            b'{' => {
                let close = text[i + 1..].find('}').map(|p| p + i + 1).ok_or_else(|| {
                    GatewayError::InvalidTemplate(format!("unclosed placeholder at byte {i}"))
                })?;
                let name = &text[i + 1..close];
                if name.is_empty() || !name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') {
                    return Err(GatewayError::InvalidTemplate(format!("bad placeholder {{{name}}}")));
                }
                if start < i {
                    out.push(Piece::Literal(&text[start..i]));
                }
                out.push(Piece::Placeholder(name));
                i = close + 1;
                start = i;
            }
            b'}' => {
                return Err(GatewayError::InvalidTemplate(format!("stray '}}' at byte {i}")));
            }
            _ => i += 1,
        }
    }
    if start < bytes.len() {
        out.push(Piece::Literal(&text[start..]));
    }
    Ok(out)
}

fn fill(text: &str, bindings: &Bindings) -> Result<String, GatewayError> {
    let mut out = String::with_capacity(text.len());
    for piece in pieces(text)? {
        match piece {
            Piece::Literal(s) => out.push_str(s),
            Piece::Brace(c) => out.push(c),
            Piece::Placeholder(name) => match bindings.get(name) {
                Some(v) => out.push_str(v),
                None => return Err(GatewayError::UnboundPlaceholder(name.to_string())),
            },
        }
    }
    Ok(out)
}

impl PromptTemplate {
    /// Placeholder names used by the system and user texts.
    pub fn placeholders(&self) -> BTreeSet<&'static str> {
        [self.system_text, self.user_text]
            .into_iter()
            .flat_map(|t| pieces(t).expect("bundled templates are well-formed"))
            .filter_map(|p| match p {
                Piece::Placeholder(n) => Some(n),
                _ => None,
            })
            .collect()
    }

    /// Renders (system, user). Extra bindings are ignored here; request
    /// validation is where exact coverage is enforced.
    pub fn render(&self, bindings: &Bindings) -> Result<(String, String), GatewayError> {
        // report the first missing name in placeholder order, system text first
        for name in self.placeholders() {
            if !bindings.contains_key(name) {
                return Err(GatewayError::UnboundPlaceholder(name.to_string()));
            }
        }
        Ok((fill(self.system_text, bindings)?, fill(self.user_text, bindings)?))
    }
}

/// Renders a template by id.
pub fn render_prompt(id: TemplateId, bindings: &Bindings) -> Result<(String, String), GatewayError> {
    id.template().render(bindings)
}

/// Convenience for building bindings from string pairs.
pub fn bindings<const N: usize>(pairs: [(&str, &str); N]) -> Bindings {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLACEHOLDER_MARKERS: [&str; 5] =
        ["{title}", "{expanded_title}", "{topic_keywords}", "{section_name}", "{summary}"];

    #[test]
    fn topic_expansion_substitutes_title() {
        let (_, user) =
            render_prompt(TemplateId::TopicExpansion, &bindings([("title", "AI-based literature review")]))
                .unwrap();
        assert!(user.contains("Topic: AI-based literature review"));
    }

    #[test]
    fn missing_binding_is_reported() {
        let err = render_prompt(TemplateId::TopicTitle, &Bindings::new()).unwrap_err();
        assert!(matches!(err, GatewayError::UnboundPlaceholder(ref n) if n == "topic_keywords"));
    }

    #[test]
    fn post_edit_substitution() {
        let b = bindings([("title", "T"), ("section_name", "S"), ("summary", "X")]);
        let (system, user) = render_prompt(TemplateId::PostEdit, &b).unwrap();
        assert!(user.contains("section \"S\""));
        assert!(user.contains("titled \"T\""));
        assert!(user.contains("Original Summary: X"));
        assert!(system.contains("in the field of T."));
        // escaped braces come out as a literal citation example
        assert!(user.contains(r"(e.g., \citep{kadir2024revealing})"));
    }

    #[test]
    fn unknown_template_name() {
        assert!(matches!("nope".parse::<TemplateId>(), Err(GatewayError::UnknownTemplate(_))));
        for id in TemplateId::ALL {
            assert_eq!(id.as_str().parse::<TemplateId>().unwrap(), id);
        }
    }

    #[test]
    fn placeholder_sets() {
        let names = |id: TemplateId| id.template().placeholders().into_iter().collect::<Vec<_>>();
        assert_eq!(names(TemplateId::TopicExpansion), ["title"]);
        assert_eq!(names(TemplateId::QueryGeneration), ["expanded_title"]);
        assert_eq!(names(TemplateId::TopicTitle), ["topic_keywords"]);
        assert_eq!(names(TemplateId::PostEdit), ["section_name", "summary", "title"]);
        assert_eq!(
            names(TemplateId::Framing),
            ["paper_count", "section", "title", "titles", "topic_count"]
        );
    }

    #[test]
    fn rendered_text_has_no_residual_placeholders() {
        for id in TemplateId::ALL {
            let b: Bindings =
                id.template().placeholders().into_iter().map(|n| (n.to_string(), format!("<{n}>"))).collect();
            let (s, u) = render_prompt(id, &b).unwrap();
            for marker in PLACEHOLDER_MARKERS {
                assert!(!s.contains(marker) && !u.contains(marker), "{id}: {marker}");
            }
        }
    }

    #[test]
    fn malformed_templates_rejected() {
        assert!(pieces("a {b").is_err());
        assert!(pieces("a } b").is_err());
        assert!(pieces("{Bad}").is_err());
        assert_eq!(pieces("{{x}}").unwrap(), vec![Piece::Brace('{'), Piece::Literal("x"), Piece::Brace('}')]);
    }
}
