//! Single choke point for language-model calls.
//!
//! A [`Gateway`] owns one [`CompletionBackend`]: either [`MockBackend`], a pure
//! function of (template, bindings, seed), or [`RemoteBackend`], which talks to
//! an OpenAI-compatible chat-completions endpoint with retry and a token-bucket
//! rate limiter.

mod limiter;
mod mock;
mod remote;
mod template;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::search::query::parse_arxiv_query;

pub use limiter::RateLimiter;
pub use mock::MockBackend;
pub use remote::{HttpReply, RemoteBackend, RetryPolicy, Transport, UreqTransport};
pub use template::{bindings, render_prompt, Bindings, PromptTemplate, TemplateId};

/// Environment variables consulted, in order, for the remote API credential.
pub const API_KEY_ENV_VARS: [&str; 2] = ["LITREVIEW_API_KEY", "OPENAI_API_KEY"];

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unbound placeholder {{{0}}}")]
    UnboundPlaceholder(String),
    #[error("binding {0:?} does not correspond to a template placeholder")]
    UnexpectedBinding(String),
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("topic is empty")]
    EmptyTopic,
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("backend unavailable after {attempts} attempts: {reason}")]
    BackendUnavailable { attempts: u32, reason: String },
    #[error("backend returned an empty completion")]
    EmptyCompletion,
    #[error("malformed query after {attempts} attempts: {reason}")]
    MalformedQuery { attempts: u32, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    Mock,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Remote => "remote",
            BackendKind::Mock => "mock",
        })
    }
}

impl FromStr for BackendKind {
    type Err = GatewayError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote" => Ok(BackendKind::Remote),
            "mock" => Ok(BackendKind::Mock),
            other => Err(GatewayError::InvalidRequest(format!("unknown backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub template_id: TemplateId,
    pub bindings: Bindings,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub seed: Option<u64>,
    /// Appended to the rendered user text, e.g. a corrective note on a retry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_instruction: Option<String>,
}

impl CompletionRequest {
    /// Bindings must cover exactly the template's placeholders.
    pub fn validate(&self) -> Result<(), GatewayError> {
        let names = self.template_id.template().placeholders();
        if let Some(missing) = names.iter().find(|n| !self.bindings.contains_key(**n)) {
            return Err(GatewayError::UnboundPlaceholder(missing.to_string()));
        }
        if let Some(extra) = self.bindings.keys().find(|k| !names.contains(k.as_str())) {
            return Err(GatewayError::UnexpectedBinding(extra.clone()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GatewayError::InvalidRequest(format!("temperature {}", self.temperature)));
        }
        if self.max_output_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_output_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Rendered (system, user) texts including any extra instruction.
    pub fn render(&self) -> Result<(String, String), GatewayError> {
        let (system, mut user) = render_prompt(self.template_id, &self.bindings)?;
        if let Some(extra) = &self.extra_instruction {
            user.push_str("\n");
            user.push_str(extra);
        }
        Ok((system, user))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub backend: BackendKind,
    pub latency_ms: u64,
    pub token_counts: Option<(u32, u32)>,
}

pub trait CompletionBackend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, GatewayError>;
}

/// Named model presets mirroring the two-model comparison axis. The ids are
/// defaults only; any model id can be configured directly.
pub fn model_preset(name: &str) -> Option<&'static str> {
    match name {
        "gpt-3.5-like" => Some("gpt-3.5-turbo"),
        "gpt-4o-like" => Some("gpt-4o"),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub backend: BackendKind,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub rate_limit_rpm: u32,
    pub seed: Option<u64>,
    pub endpoint: String,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mock,
            model_id: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            max_output_tokens: 1024,
            rate_limit_rpm: 60,
            seed: Some(0),
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
        }
    }
}

/// Reads the API credential from the environment.
pub fn api_key_from_env() -> Option<String> {
    API_KEY_ENV_VARS
        .iter()
        .filter_map(|v| std::env::var(v).ok())
        .find(|k| !k.trim().is_empty())
}

#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn CompletionBackend>,
    config: GatewayConfig,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway").field("backend", &self.backend.kind()).field("config", &self.config).finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn CompletionBackend>, config: GatewayConfig) -> Self {
        Self { backend, config }
    }

    pub fn mock(seed: u64) -> Self {
        let config = GatewayConfig { seed: Some(seed), ..GatewayConfig::default() };
        Self::new(Arc::new(MockBackend), config)
    }

    /// Builds the backend named in `config`. The remote backend needs a
    /// credential from [`API_KEY_ENV_VARS`].
    pub fn from_config(config: GatewayConfig) -> Result<Self, GatewayError> {
        let backend: Arc<dyn CompletionBackend> = match config.backend {
            BackendKind::Mock => Arc::new(MockBackend),
            BackendKind::Remote => {
                let key = api_key_from_env().ok_or_else(|| {
                    GatewayError::AuthError(format!("set one of {}", API_KEY_ENV_VARS.join(", ")))
                })?;
                Arc::new(RemoteBackend::new(
                    config.endpoint.clone(),
                    key,
                    Box::new(UreqTransport::default()),
                    RetryPolicy::default(),
                    RateLimiter::per_minute(config.rate_limit_rpm),
                ))
            }
        };
        Ok(Self::new(backend, config))
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn request(&self, template_id: TemplateId, bindings: Bindings) -> CompletionRequest {
        CompletionRequest {
            template_id,
            bindings,
            model_id: self.config.model_id.clone(),
            temperature: self.config.temperature,
            max_output_tokens: self.config.max_output_tokens,
            seed: self.config.seed,
            extra_instruction: None,
        }
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
        request.validate()?;
        let result = self.backend.complete(request)?;
        if result.text.trim().is_empty() {
            return Err(GatewayError::EmptyCompletion);
        }
        Ok(result)
    }

    /// Renders and completes one template; returns the trimmed text.
    pub fn complete_template(
        &self,
        template_id: TemplateId,
        bindings: Bindings,
        extra_instruction: Option<String>,
    ) -> Result<String, GatewayError> {
        let mut req = self.request(template_id, bindings);
        req.extra_instruction = extra_instruction;
        Ok(self.complete(&req)?.text.trim().to_string())
    }
}

/// Strips wrapping quotes/backticks and collapses the text to one line.
pub(crate) fn single_line(text: &str) -> String {
    let joined = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("```"))
        .collect::<Vec<_>>()
        .join(" ");
    let t = joined.trim();
    let t = t.strip_prefix('`').and_then(|s| s.strip_suffix('`')).unwrap_or(t);
    let t = if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') && t.matches('"').count() == 2 {
        &t[1..t.len() - 1]
    } else {
        t
    };
    t.trim().to_string()
}

/// Expands a raw research topic into a richer one-line title.
pub fn expand_topic(gateway: &Gateway, raw_title: &str) -> Result<String, GatewayError> {
    let title = raw_title.trim();
    if title.is_empty() {
        return Err(GatewayError::EmptyTopic);
    }
    let text = gateway.complete_template(TemplateId::TopicExpansion, bindings([("title", title)]), None)?;
    let expanded = single_line(&text);
    if expanded.is_empty() {
        return Err(GatewayError::EmptyCompletion);
    }
    Ok(expanded)
}

/// Number of regenerations allowed after the first invalid query.
pub const QUERY_REGENERATIONS: u32 = 2;

/// Asks the model for an arXiv query and validates it against the query
/// grammar, regenerating with a corrective note up to [`QUERY_REGENERATIONS`]
/// times.
pub fn generate_search_query(gateway: &Gateway, expanded_title: &str) -> Result<String, GatewayError> {
    let expanded = expanded_title.trim();
    if expanded.is_empty() {
        return Err(GatewayError::EmptyTopic);
    }
    let mut extra = None;
    let mut last_reason = String::new();
    for attempt in 1..=QUERY_REGENERATIONS + 1 {
        let text =
            gateway.complete_template(TemplateId::QueryGeneration, bindings([("expanded_title", expanded)]), extra)?;
        let query = single_line(&text);
        match parse_arxiv_query(&query) {
            Ok(_) => return Ok(query),
            Err(e) => {
                log::warn!("query attempt {attempt} rejected: {e}");
                last_reason = e.to_string();
                extra = Some(format!(
                    "Your previous answer `{query}` is not a valid arXiv query ({e}). \
                     Use only ti:, abs: or all: fields, double-quoted phrases, parentheses and the \
                     operators AND, OR, ANDNOT. Provide the query only."
                ));
            }
        }
    }
    Err(GatewayError::MalformedQuery { attempts: QUERY_REGENERATIONS + 1, reason: last_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Scripted {
        replies: Vec<&'static str>,
        calls: AtomicU32,
    }

    impl CompletionBackend for Scripted {
        fn kind(&self) -> BackendKind {
            BackendKind::Remote
        }
        fn complete(&self, _req: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
            let i = self.calls.fetch_add(1, Ordering::SeqCst) as usize;
            let text = self.replies[i.min(self.replies.len() - 1)].to_string();
            Ok(CompletionResult { text, backend: BackendKind::Remote, latency_ms: 0, token_counts: None })
        }
    }

    fn scripted(replies: Vec<&'static str>) -> (Gateway, Arc<Scripted>) {
        let backend = Arc::new(Scripted { replies, calls: AtomicU32::new(0) });
        (Gateway::new(backend.clone(), GatewayConfig::default()), backend)
    }

    #[test]
    fn expansion_of_paper_example_topic() {
        let g = Gateway::mock(0);
        let out = expand_topic(&g, "AI-based literature review").unwrap();
        assert_eq!(
            out,
            "AI-based literature review, automated systematic reviews, natural language processing for academic research synthesis"
        );
    }

    #[test]
    fn blank_topic_rejected() {
        assert!(matches!(expand_topic(&Gateway::mock(0), "   "), Err(GatewayError::EmptyTopic)));
        assert!(matches!(generate_search_query(&Gateway::mock(0), ""), Err(GatewayError::EmptyTopic)));
    }

    #[test]
    fn mock_query_parses() {
        let g = Gateway::mock(3);
        for topic in ["Blockchain", "Virtual Reality", "AI \"quoted\" (odd) topic"] {
            let expanded = expand_topic(&g, topic).unwrap();
            let q = generate_search_query(&g, &expanded).unwrap();
            assert!(parse_arxiv_query(&q).is_ok(), "{q}");
            assert!(q.starts_with("(ti:\""));
        }
    }

    #[test]
    fn invalid_queries_regenerate_then_fail() {
        let (g, backend) = scripted(vec!["ti:\"unclosed", "ti:(a OR", "abs:ok AND"]);
        let err = generate_search_query(&g, "topic").unwrap_err();
        assert!(matches!(err, GatewayError::MalformedQuery { attempts: 3, .. }));
        assert_eq!(backend.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn regeneration_recovers() {
        let (g, backend) = scripted(vec!["not a (query", "```\nti:\"graph neural networks\" OR abs:gnn\n```"]);
        let q = generate_search_query(&g, "topic").unwrap();
        assert_eq!(q, "ti:\"graph neural networks\" OR abs:gnn");
        assert_eq!(backend.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn request_binding_coverage() {
        let g = Gateway::mock(0);
        let mut req = g.request(TemplateId::TopicExpansion, bindings([("title", "x")]));
        assert!(req.validate().is_ok());
        req.bindings.insert("summary".into(), "y".into());
        assert!(matches!(req.validate(), Err(GatewayError::UnexpectedBinding(_))));
        let req = g.request(TemplateId::TopicExpansion, Bindings::new());
        assert!(matches!(g.complete(&req), Err(GatewayError::UnboundPlaceholder(_))));
    }

    #[test]
    fn empty_completion_is_an_error() {
        let (g, _) = scripted(vec!["   "]);
        assert!(matches!(expand_topic(&g, "x"), Err(GatewayError::EmptyCompletion)));
    }

    #[test]
    fn presets() {
        assert_eq!(model_preset("gpt-4o-like"), Some("gpt-4o"));
        assert_eq!(model_preset("gpt-3.5-like"), Some("gpt-3.5-turbo"));
        assert_eq!(model_preset("other"), None);
    }

    #[test]
    fn single_line_cleanup() {
        assert_eq!(single_line("\"Deep Learning\"\n"), "Deep Learning");
        assert_eq!(single_line("`ti:x`"), "ti:x");
        assert_eq!(single_line("a\n\n b"), "a b");
        assert_eq!(single_line("ti:\"a\" OR abs:\"b\""), "ti:\"a\" OR abs:\"b\"");
    }
}
