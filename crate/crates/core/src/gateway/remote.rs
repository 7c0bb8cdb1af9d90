//! OpenAI-compatible chat-completions backend.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{BackendKind, CompletionBackend, CompletionRequest, CompletionResult, GatewayError, RateLimiter};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// HTTP seam so failure modes can be injected in tests. `Err` means the request
/// never produced a status (connection refused, timeout, ...).
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, bearer: &str, body: &str) -> Result<HttpReply, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(180)))
            .build();
        Self { agent: config.into() }
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, url: &str, bearer: &str, body: &str) -> Result<HttpReply, String> {
        let mut resp = self
            .agent
            .post(url)
            .header("Authorization", &format!("Bearer {bearer}"))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpReply { status, body })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_delay: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, initial_delay: Duration::from_secs(1), multiplier: 2.0 }
    }
}

impl RetryPolicy {
    pub fn delay_before(&self, attempt: u32) -> Duration {
        // attempt is 1-based; no delay before the first
        if attempt <= 1 {
            return Duration::ZERO;
        }
        self.initial_delay.mul_f64(self.multiplier.powi(attempt as i32 - 2))
    }
}

pub struct RemoteBackend {
    endpoint: String,
    api_key: String,
    transport: Box<dyn Transport>,
    retry: RetryPolicy,
    limiter: RateLimiter,
}

enum Failure {
    Fatal(GatewayError),
    Retry { rate_limited: bool, reason: String },
}

impl RemoteBackend {
    pub fn new(
        endpoint: String,
        api_key: String,
        transport: Box<dyn Transport>,
        retry: RetryPolicy,
        limiter: RateLimiter,
    ) -> Self {
        Self { endpoint, api_key, transport, retry, limiter }
    }

    fn body(req: &CompletionRequest) -> Result<String, GatewayError> {
        let (system, user) = req.render()?;
        let mut body = json!({
            "model": req.model_id,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        });
        if let Some(seed) = req.seed {
            body["seed"] = json!(seed);
        }
        Ok(body.to_string())
    }

    fn attempt(&self, body: &str) -> Result<(String, Option<(u32, u32)>), Failure> {
        self.limiter.acquire();
        let reply = self
            .transport
            .post_json(&self.endpoint, &self.api_key, body)
            .map_err(|reason| Failure::Retry { rate_limited: false, reason })?;
        match reply.status {
            200..=299 => {}
            401 | 403 => return Err(Failure::Fatal(GatewayError::AuthError(format!("HTTP {}", reply.status)))),
            429 => return Err(Failure::Retry { rate_limited: true, reason: "HTTP 429".into() }),
            500..=599 => return Err(Failure::Retry { rate_limited: false, reason: format!("HTTP {}", reply.status) }),
            s => {
                let excerpt: String = reply.body.chars().take(200).collect();
                return Err(Failure::Fatal(GatewayError::InvalidRequest(format!("HTTP {s}: {excerpt}"))));
            }
        }
        let v: Value = serde_json::from_str(&reply.body)
            .map_err(|e| Failure::Retry { rate_limited: false, reason: format!("bad response body: {e}") })?;
        let text = v["choices"][0]["message"]["content"].as_str().unwrap_or("").to_string();
        if text.trim().is_empty() {
            return Err(Failure::Fatal(GatewayError::EmptyCompletion));
        }
        let usage = &v["usage"];
        let counts = match (usage["prompt_tokens"].as_u64(), usage["completion_tokens"].as_u64()) {
            (Some(p), Some(c)) => Some((p as u32, c as u32)),
            _ => None,
        };
        Ok((text, counts))
    }
}

impl CompletionBackend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Remote
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
        let body = Self::body(req)?;
        let start = Instant::now();
        let attempts = self.retry.max_attempts.max(1);
        let mut last = (false, String::new());
        for attempt in 1..=attempts {
            std::thread::sleep(self.retry.delay_before(attempt));
            match self.attempt(&body) {
                Ok((text, token_counts)) => {
                    return Ok(CompletionResult {
                        text,
                        backend: BackendKind::Remote,
                        latency_ms: start.elapsed().as_millis() as u64,
                        token_counts,
                    })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry { rate_limited, reason }) => {
                    log::warn!("{} attempt {attempt}/{attempts} failed: {reason}", req.template_id);
                    last = (rate_limited, reason);
                }
            }
        }
        if last.0 {
            Err(GatewayError::RateLimited { attempts })
        } else {
            Err(GatewayError::BackendUnavailable { attempts, reason: last.1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{bindings, Gateway, GatewayConfig, TemplateId};
    use std::sync::{Arc, Mutex};

    #[derive(Clone, Default)]
    struct Fake {
        replies: Arc<Mutex<Vec<Result<HttpReply, String>>>>,
        bodies: Arc<Mutex<Vec<String>>>,
    }

    impl Fake {
        fn new(mut replies: Vec<Result<HttpReply, String>>) -> Self {
            replies.reverse();
            Self { replies: Arc::new(Mutex::new(replies)), ..Default::default() }
        }
        fn calls(&self) -> usize {
            self.bodies.lock().unwrap().len()
        }
    }

    impl Transport for Fake {
        fn post_json(&self, _url: &str, _bearer: &str, body: &str) -> Result<HttpReply, String> {
            self.bodies.lock().unwrap().push(body.to_string());
            let mut r = self.replies.lock().unwrap();
            if r.len() > 1 {
                r.pop().unwrap()
            } else {
                r[0].clone()
            }
        }
    }

    fn reply(status: u16, body: &str) -> Result<HttpReply, String> {
        Ok(HttpReply { status, body: body.to_string() })
    }

    fn ok(text: &str) -> Result<HttpReply, String> {
        reply(
            200,
            &json!({"choices": [{"message": {"content": text}}], "usage": {"prompt_tokens": 5, "completion_tokens": 2}})
                .to_string(),
        )
    }

    fn gateway(fake: &Fake) -> Gateway {
        let retry = RetryPolicy { initial_delay: Duration::ZERO, ..RetryPolicy::default() };
        let backend = RemoteBackend::new(
            "http://example.invalid".into(),
            "k".into(),
            Box::new(fake.clone()),
            retry,
            RateLimiter::unlimited(),
        );
        Gateway::new(Arc::new(backend), GatewayConfig::default())
    }

    fn call(g: &Gateway) -> Result<CompletionResult, GatewayError> {
        g.complete(&g.request(TemplateId::TopicExpansion, bindings([("title", "x")])))
    }

    #[test]
    fn permanent_failure_is_three_attempts() {
        let fake = Fake::new(vec![reply(503, "")]);
        let err = call(&gateway(&fake)).unwrap_err();
        assert!(matches!(err, GatewayError::BackendUnavailable { attempts: 3, .. }));
        assert_eq!(fake.calls(), 3);
    }

    #[test]
    fn network_errors_are_retried() {
        let fake = Fake::new(vec![Err("refused".into()), ok("fine")]);
        let r = call(&gateway(&fake)).unwrap();
        assert_eq!(r.text, "fine");
        assert_eq!(r.token_counts, Some((5, 2)));
        assert_eq!(fake.calls(), 2);
    }

    #[test]
    fn auth_failure_not_retried() {
        let fake = Fake::new(vec![reply(401, "")]);
        assert!(matches!(call(&gateway(&fake)), Err(GatewayError::AuthError(_))));
        assert_eq!(fake.calls(), 1);
    }

    #[test]
    fn rate_limit_exhaustion() {
        let fake = Fake::new(vec![reply(429, "")]);
        assert!(matches!(call(&gateway(&fake)), Err(GatewayError::RateLimited { attempts: 3 })));
    }

    #[test]
    fn empty_completion() {
        let fake = Fake::new(vec![ok("  ")]);
        assert!(matches!(call(&gateway(&fake)), Err(GatewayError::EmptyCompletion)));
        assert_eq!(fake.calls(), 1);
    }

    #[test]
    fn request_body_shape() {
        let fake = Fake::new(vec![ok("x")]);
        call(&gateway(&fake)).unwrap();
        let body: Value = serde_json::from_str(&fake.bodies.lock().unwrap()[0]).unwrap();
        assert_eq!(body["temperature"], json!(0.0));
        assert_eq!(body["messages"][0]["role"], "system");
        assert!(body["messages"][1]["content"].as_str().unwrap().contains("Topic: x"));
    }

    #[test]
    fn backoff_schedule() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay_before(1), Duration::ZERO);
        assert_eq!(p.delay_before(2), Duration::from_secs(1));
        assert_eq!(p.delay_before(3), Duration::from_secs(2));
    }
}
