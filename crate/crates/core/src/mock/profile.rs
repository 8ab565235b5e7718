//! Response profiles of the reference server. Every profile except
//! `Scripted` answers as a pure function of the request body.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::gateway::LOS_LABELS;
use crate::model::{DemographicProfile, Gender, LosDistribution};
use crate::parser::{scan_demographics, scan_vitals};
use crate::taxonomy::{classify_age, LosReference};

use super::MockError;

/// Expected stay of a note with zero total severity.
pub const BASELINE_DAYS: f64 = 7.0;
pub const MIN_DAYS: f64 = 3.0;
pub const MAX_DAYS: f64 = 21.0;
pub const SCORE_BASE: f64 = -2.0;
pub const SCORE_SLOPE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MockProfile {
    Constant {
        probs: [f64; 4],
        #[serde(default = "default_tokens")]
        token_logprobs: Vec<f64>,
    },
    SeverityOracle {
        beta: f64,
    },
    /// Severity oracle plus a per-class offset in days. Keys are
    /// `gender:M`, `age:<class>` or `ethnicity:<label>`.
    DemographicBias {
        beta: f64,
        offsets: BTreeMap<String, f64>,
    },
    Scripted {
        #[serde(default)]
        steps: Vec<ScriptStep>,
        /// Requests whose text contains any of these fail with 500 for good.
        #[serde(default)]
        fail_matching: Vec<String>,
        fallback: Box<MockProfile>,
    },
}

fn default_tokens() -> Vec<f64> {
    vec![-1.0, -2.0, -3.0]
}

/// One scripted reply, consumed in arrival order before the fallback
/// takes over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum ScriptStep {
    Status { code: u16 },
    Delay { ms: u64 },
    Respond { body: String },
}

impl MockProfile {
    pub fn uniform() -> Self {
        MockProfile::Constant { probs: [0.25; 4], token_logprobs: default_tokens() }
    }

    pub fn validate(&self) -> Result<(), MockError> {
        match self {
            MockProfile::Constant { probs, token_logprobs } => {
                LosDistribution::new(*probs).map_err(|e| MockError::Profile(e.to_string()))?;
                if token_logprobs.is_empty() || token_logprobs.iter().any(|x| !x.is_finite()) {
                    return Err(MockError::Profile("token_logprobs must be finite and non-empty".into()));
                }
            }
            MockProfile::SeverityOracle { beta } => check_finite("beta", *beta)?,
            MockProfile::DemographicBias { beta, offsets } => {
                check_finite("beta", *beta)?;
                for (k, d) in offsets {
                    check_finite(k, *d)?;
                }
            }
            MockProfile::Scripted { fallback, .. } => fallback.validate()?,
        }
        Ok(())
    }

    /// Parses a profile from JSON, or one of the shorthands `constant`,
    /// `uniform`, `oracle[:beta]`.
    pub fn parse(spec: &str) -> Result<Self, MockError> {
        let s = spec.trim();
        let profile = if s.starts_with('{') {
            serde_json::from_str(s).map_err(|e| MockError::Profile(e.to_string()))?
        } else if s == "constant" || s == "uniform" {
            MockProfile::uniform()
        } else if let Some(rest) = s.strip_prefix("oracle") {
            let beta = match rest.strip_prefix(':') {
                Some(b) => b.parse().map_err(|_| MockError::Profile(format!("bad beta {b:?}")))?,
                None if rest.is_empty() => 1.0,
                None => return Err(MockError::Profile(format!("unknown profile {s:?}"))),
            };
            MockProfile::SeverityOracle { beta }
        } else {
            return Err(MockError::Profile(format!("unknown profile {s:?}")));
        };
        profile.validate()?;
        Ok(profile)
    }
}

fn check_finite(name: &str, x: f64) -> Result<(), MockError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(MockError::Profile(format!("{name} must be finite")))
    }
}

/// Offset key of each demographic attribute present in a profile.
pub fn offset_keys(p: &DemographicProfile) -> Vec<String> {
    let mut keys = Vec::new();
    if let Some(g) = p.gender {
        keys.push(format!("gender:{}", if g == Gender::M { "M" } else { "F" }));
    }
    if let Some(c) = p.age_years.and_then(|a| classify_age(a as i64).ok()) {
        keys.push(format!("age:{}", c.display_name()));
    }
    if let Some(e) = p.ethnicity {
        keys.push(format!("ethnicity:{}", e.label()));
    }
    keys
}

/// Expected stay the oracle aims for.
pub fn oracle_expected_los(beta: f64, severity_sum: i32, offset: f64) -> f64 {
    (BASELINE_DAYS + beta * severity_sum as f64 + offset).clamp(MIN_DAYS, MAX_DAYS)
}

/// Mean token log-probability the oracle reports.
pub fn oracle_score(severity_sum: i32) -> f64 {
    SCORE_BASE - SCORE_SLOPE * severity_sum.unsigned_abs() as f64
}

/// Two-point mixture over the reference days bracketing `expected`, whose
/// mean is exactly `expected`.
pub fn bracketing_mixture(expected: f64, reference: &LosReference) -> [f64; 4] {
    let r = reference.days();
    let e = expected.clamp(r[0], r[3]);
    let i = (0..3).rev().find(|&i| r[i] <= e).unwrap_or(0);
    let lower = (r[i + 1] - e) / (r[i + 1] - r[i]);
    let mut p = [0.0; 4];
    p[i] = lower;
    p[i + 1] = 1.0 - lower;
    p
}

/// The note part of a classification prompt built from the default
/// template; the whole prompt otherwise.
pub fn note_of_prompt(prompt: &str) -> &str {
    let start = prompt.find("Admission note:\n").map_or(0, |i| i + "Admission note:\n".len());
    let end = prompt.rfind("\n\nAnswer:").filter(|&e| e >= start).unwrap_or(prompt.len());
    &prompt[start..end]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockReply {
    pub status: u16,
    pub body: String,
    pub delay_ms: u64,
}

impl MockReply {
    fn json(body: serde_json::Value) -> Self {
        MockReply { status: 200, body: body.to_string(), delay_ms: 0 }
    }

    fn error(status: u16, message: &str) -> Self {
        MockReply { status, body: json!({ "error": message }).to_string(), delay_ms: 0 }
    }
}

#[derive(Deserialize)]
struct ScoreBody {
    #[allow(dead_code)]
    model: String,
    text: String,
}

#[derive(Deserialize)]
struct ClassifyBody {
    #[allow(dead_code)]
    model: String,
    prompt: String,
    labels: Vec<String>,
}

enum Request {
    Score(String),
    Classify(String),
}

fn decode(path: &str, body: &[u8]) -> Result<Request, MockReply> {
    let bad = |e: serde_json::Error| MockReply::error(400, &e.to_string());
    match path {
        "/v1/score" => {
            let b: ScoreBody = serde_json::from_slice(body).map_err(bad)?;
            if b.text.is_empty() {
                return Err(MockReply::error(400, "empty text"));
            }
            Ok(Request::Score(b.text))
        }
        "/v1/classify" => {
            let b: ClassifyBody = serde_json::from_slice(body).map_err(bad)?;
            if b.labels != LOS_LABELS {
                return Err(MockReply::error(400, "labels must be [\"1\",\"2\",\"3\",\"4\"]"));
            }
            Ok(Request::Classify(b.prompt))
        }
        _ => Err(MockReply::error(404, "unknown path")),
    }
}

fn label_logprobs(p: &[f64; 4]) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = LOS_LABELS
        .iter()
        .zip(p)
        .map(|(l, &x)| (l.to_string(), if x > 0.0 { json!(x.ln()) } else { serde_json::Value::Null }))
        .collect();
    json!({ "label_logprobs": map })
}

fn score_reply(value: f64, text: &str) -> MockReply {
    let n = text.split_whitespace().count().max(1);
    MockReply::json(json!({ "token_logprobs": vec![value; n] }))
}

fn oracle_reply(req: &Request, beta: f64, offsets: Option<&BTreeMap<String, f64>>) -> MockReply {
    match req {
        Request::Score(text) => score_reply(oracle_score(scan_vitals(text).severity_sum()), text),
        Request::Classify(prompt) => {
            let note = note_of_prompt(prompt);
            let offset: f64 = offsets.map_or(0.0, |o| {
                offset_keys(&scan_demographics(note)).iter().filter_map(|k| o.get(k)).sum()
            });
            let e = oracle_expected_los(beta, scan_vitals(note).severity_sum(), offset);
            MockReply::json(label_logprobs(&bracketing_mixture(e, &LosReference::default())))
        }
    }
}

/// Request handler. Holds the script cursor of a `Scripted` profile.
#[derive(Debug)]
pub struct MockHandler {
    profile: MockProfile,
    cursor: AtomicUsize,
}

impl MockHandler {
    pub fn new(profile: MockProfile) -> Result<Self, MockError> {
        profile.validate()?;
        Ok(MockHandler { profile, cursor: AtomicUsize::new(0) })
    }

    pub fn profile(&self) -> &MockProfile {
        &self.profile
    }

    pub fn handle(&self, method: &str, path: &str, body: &[u8]) -> MockReply {
        if method != "POST" {
            return MockReply::error(405, "POST only");
        }
        let req = match decode(path, body) {
            Ok(r) => r,
            Err(reply) => return reply,
        };
        self.reply(&self.profile, &req)
    }

    fn reply(&self, profile: &MockProfile, req: &Request) -> MockReply {
        match profile {
            MockProfile::Constant { probs, token_logprobs } => match req {
                Request::Score(_) => MockReply::json(json!({ "token_logprobs": token_logprobs })),
                Request::Classify(_) => MockReply::json(label_logprobs(probs)),
            },
            MockProfile::SeverityOracle { beta } => oracle_reply(req, *beta, None),
            MockProfile::DemographicBias { beta, offsets } => oracle_reply(req, *beta, Some(offsets)),
            MockProfile::Scripted { steps, fail_matching, fallback } => {
                let i = self.cursor.fetch_add(1, Ordering::SeqCst);
                if let Some(step) = steps.get(i) {
                    return match step {
                        ScriptStep::Status { code } => MockReply::error(*code, "scripted failure"),
                        ScriptStep::Respond { body } => MockReply { status: 200, body: body.clone(), delay_ms: 0 },
                        ScriptStep::Delay { ms } => MockReply { delay_ms: *ms, ..self.reply(fallback, req) },
                    };
                }
                let text = match req {
                    Request::Score(t) | Request::Classify(t) => t,
                };
                if fail_matching.iter().any(|m| text.contains(m.as_str())) {
                    return MockReply::error(500, "scripted permanent failure");
                }
                self.reply(fallback, req)
            }
        }
    }
}
