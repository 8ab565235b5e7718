//! Client side of the scoring and classification wire protocol.
//!
//! ```text
//! POST /v1/score     {"model", "text"}             -> {"token_logprobs": [..]}
//! POST /v1/classify  {"model", "prompt", "labels"} -> {"label_logprobs": {label: x | null}}
//! ```
//!
//! Log-probabilities are in nats. 429 and 5xx responses are retried, other
//! 4xx responses are final.

pub mod batch;
pub mod client;
pub mod prompt;
pub mod softmax;

use thiserror::Error;

pub use batch::{run_probe_batch, BatchOptions, BatchOutcome, ErrorMarker, ProbeItem, ProbeSet, RunError};
pub use client::{EndpointConfig, Gateway, ScoreResult, StatsSnapshot, ENDPOINT_ENV};
pub use prompt::{PromptRegistry, DEFAULT_TEMPLATE_ID};
pub use softmax::{label_softmax, LOS_LABELS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("timeout: {0}")]
    Timeout(String),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("bad payload: {0}")]
    Payload(String),
    #[error("all label scores are excluded")]
    Degenerate,
    #[error("config: {0}")]
    Config(String),
    #[error("empty text")]
    EmptyText,
}
