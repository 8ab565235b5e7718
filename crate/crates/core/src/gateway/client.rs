//! Blocking HTTP client for the score and classify endpoints.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use crate::model::LosDistribution;

use super::prompt::PromptRegistry;
use super::softmax::{label_softmax, LOS_LABELS};
use super::GatewayError;

pub const ENDPOINT_ENV: &str = "DEVISE_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub base_url: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub max_in_flight: usize,
    pub auth_token: Option<String>,
    pub model_tag: String,
    /// First retry delay; doubles on each further retry.
    pub backoff_ms: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://127.0.0.1:8765".into(),
            timeout_ms: 30_000,
            max_retries: 3,
            max_in_flight: 4,
            auth_token: None,
            model_tag: "model".into(),
            backoff_ms: 50,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_in_flight == 0 {
            return Err(GatewayError::Config("max_in_flight must be at least 1".into()));
        }
        if self.timeout_ms == 0 {
            return Err(GatewayError::Config("timeout_ms must be positive".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(GatewayError::Config(format!("base_url {:?} is not an http URL", self.base_url)));
        }
        Ok(())
    }

    /// Applies the endpoint environment override, if set.
    pub fn with_env_override(mut self) -> Self {
        if let Ok(url) = std::env::var(ENDPOINT_ENV) {
            if !url.trim().is_empty() {
                self.base_url = url.trim().to_string();
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    /// Mean per-token log-probability in nats.
    pub mean_logprob: f64,
    pub token_count: u32,
}

#[derive(Debug, Serialize)]
struct ScoreRequest<'a> {
    model: &'a str,
    text: &'a str,
}

#[derive(Debug, Deserialize)]
struct ScoreResponse {
    token_logprobs: Vec<Option<f64>>,
}

#[derive(Debug, Serialize)]
struct ClassifyRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    labels: [&'a str; 4],
}

#[derive(Debug, Deserialize)]
struct ClassifyResponse {
    label_logprobs: BTreeMap<String, Option<f64>>,
}

/// Request counters, shared across threads.
#[derive(Debug, Default)]
pub struct CallStats {
    pub requests: AtomicU64,
    pub retries: AtomicU64,
    pub failures: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsSnapshot {
    pub requests: u64,
    pub retries: u64,
    pub failures: u64,
}

pub struct Gateway {
    config: EndpointConfig,
    agent: Agent,
    prompts: PromptRegistry,
    stats: CallStats,
}

enum Attempt {
    Retry(GatewayError),
    Fail(GatewayError),
}

impl Gateway {
    pub fn new(config: EndpointConfig, prompts: PromptRegistry) -> Result<Self, GatewayError> {
        config.validate()?;
        let agent_config = Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .http_status_as_error(false)
            .build();
        Ok(Gateway { agent: Agent::new_with_config(agent_config), config, prompts, stats: CallStats::default() })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    pub fn prompts(&self) -> &PromptRegistry {
        &self.prompts
    }

    pub fn stats(&self) -> StatsSnapshot {
        StatsSnapshot {
            requests: self.stats.requests.load(Ordering::Relaxed),
            retries: self.stats.retries.load(Ordering::Relaxed),
            failures: self.stats.failures.load(Ordering::Relaxed),
        }
    }

    fn attempt(&self, url: &str, body: &str) -> Result<String, Attempt> {
        self.stats.requests.fetch_add(1, Ordering::Relaxed);
        let mut req = self.agent.post(url).content_type("application/json");
        if let Some(token) = &self.config.auth_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = match req.send(body) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(t)) => return Err(Attempt::Retry(GatewayError::Timeout(t.to_string()))),
            Err(e) => return Err(Attempt::Retry(GatewayError::Transport(e.to_string()))),
        };
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string();
        match status {
            200..=299 => text.map_err(|e| Attempt::Retry(GatewayError::Transport(e.to_string()))),
            429 | 500..=599 => Err(Attempt::Retry(GatewayError::Status(status))),
            _ => Err(Attempt::Fail(GatewayError::Status(status))),
        }
    }

    /// POSTs `body` with retries on transport errors, timeouts, 429 and 5xx.
    fn post(&self, path: &str, body: &str) -> Result<String, GatewayError> {
        let url = format!("{}{path}", self.config.base_url.trim_end_matches('/'));
        let mut last = None;
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                self.stats.retries.fetch_add(1, Ordering::Relaxed);
                let wait = self.config.backoff_ms.saturating_mul(1 << (attempt - 1).min(10));
                std::thread::sleep(Duration::from_millis(wait));
            }
            match self.attempt(&url, body) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fail(e)) => {
                    self.stats.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(e);
                }
                Err(Attempt::Retry(e)) => last = Some(e),
            }
        }
        self.stats.failures.fetch_add(1, Ordering::Relaxed);
        let last = last.expect("at least one attempt");
        Err(match last {
            GatewayError::Status(_) => last,
            other => GatewayError::Transport(format!("gave up after {} attempts: {other}", self.config.max_retries + 1)),
        })
    }

    /// Mean per-token log-probability of `text`, computed from the returned
    /// token array.
    pub fn score_note(&self, text: &str) -> Result<ScoreResult, GatewayError> {
        if text.is_empty() {
            return Err(GatewayError::EmptyText);
        }
        let body = serde_json::to_string(&ScoreRequest { model: &self.config.model_tag, text })
            .map_err(|e| GatewayError::Payload(e.to_string()))?;
        let raw = self.post("/v1/score", &body)?;
        let resp: ScoreResponse = serde_json::from_str(&raw).map_err(|e| GatewayError::Payload(e.to_string()))?;
        score_from_tokens(&resp.token_logprobs)
    }

    /// Zero-shot LOS distribution for a note under a registered prompt.
    pub fn classify_los(&self, note_text: &str, template_id: &str) -> Result<LosDistribution, GatewayError> {
        if note_text.is_empty() {
            return Err(GatewayError::EmptyText);
        }
        let prompt = self.prompts.build_prompt(note_text, template_id)?;
        self.classify_prompt(&prompt)
    }

    pub fn classify_prompt(&self, prompt: &str) -> Result<LosDistribution, GatewayError> {
        let body = serde_json::to_string(&ClassifyRequest { model: &self.config.model_tag, prompt, labels: LOS_LABELS })
            .map_err(|e| GatewayError::Payload(e.to_string()))?;
        let raw = self.post("/v1/classify", &body)?;
        let resp: ClassifyResponse = serde_json::from_str(&raw).map_err(|e| GatewayError::Payload(e.to_string()))?;
        label_softmax(&resp.label_logprobs)
    }
}

pub fn score_from_tokens(tokens: &[Option<f64>]) -> Result<ScoreResult, GatewayError> {
    if tokens.is_empty() {
        return Err(GatewayError::Payload("empty token_logprobs".into()));
    }
    let mut sum = 0.0;
    for t in tokens {
        match t {
            Some(x) if x.is_finite() => sum += x,
            _ => return Err(GatewayError::Payload("non-finite token logprob".into())),
        }
    }
    let count = u32::try_from(tokens.len()).map_err(|_| GatewayError::Payload("too many tokens".into()))?;
    Ok(ScoreResult { mean_logprob: sum / tokens.len() as f64, token_count: count })
}
