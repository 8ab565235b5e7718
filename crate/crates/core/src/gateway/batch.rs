//! Bounded-concurrency probing of counterfactual pairs with ordered output.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CounterfactualNote, EvalRecord, LosDistribution};

use super::client::{Gateway, ScoreResult, StatsSnapshot};
use super::prompt::DEFAULT_TEMPLATE_ID;
use super::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub score: bool,
    pub classify: bool,
}

impl Default for ProbeSet {
    fn default() -> Self {
        ProbeSet { score: true, classify: true }
    }
}

impl ProbeSet {
    /// Parses a comma-separated list of `score` and `classify`.
    pub fn parse(spec: &str) -> Result<Self, GatewayError> {
        let mut p = ProbeSet { score: false, classify: false };
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match part {
                "score" => p.score = true,
                "classify" => p.classify = true,
                other => return Err(GatewayError::Config(format!("unknown probe {other:?}"))),
            }
        }
        if !p.score && !p.classify {
            return Err(GatewayError::Config("no probes selected".into()));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchOptions {
    pub probes: ProbeSet,
    pub template_id: String,
    /// Score the classification prompt around the note instead of the bare
    /// note text.
    pub score_with_prompt: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions { probes: ProbeSet::default(), template_id: DEFAULT_TEMPLATE_ID.into(), score_with_prompt: false }
    }
}

/// Stand-in for a pair whose probes failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorMarker {
    pub base_note_id: String,
    pub spec_digest: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeItem {
    Record(EvalRecord),
    Failed(ErrorMarker),
}

impl ProbeItem {
    pub fn record(&self) -> Option<&EvalRecord> {
        match self {
            ProbeItem::Record(r) => Some(r),
            ProbeItem::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    /// One item per input pair, in input order.
    pub items: Vec<ProbeItem>,
    pub stats: StatsSnapshot,
    pub elapsed_ms: u64,
}

impl BatchOutcome {
    pub fn records(&self) -> impl Iterator<Item = &EvalRecord> {
        self.items.iter().filter_map(ProbeItem::record)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ErrorMarker> {
        self.items.iter().filter_map(|i| match i {
            ProbeItem::Failed(m) => Some(m),
            ProbeItem::Record(_) => None,
        })
    }
}

#[derive(Debug, Error)]
#[error("{failed} of {total} pairs failed")]
pub struct RunError {
    pub failed: usize,
    pub total: usize,
    pub partial: Box<BatchOutcome>,
}

#[derive(Debug, Clone, Copy)]
struct TextProbe {
    score: Option<ScoreResult>,
    dist: Option<LosDistribution>,
}

fn probe_text(gateway: &Gateway, text: &str, options: &BatchOptions) -> Result<TextProbe, GatewayError> {
    let score = if options.probes.score {
        let scored = if options.score_with_prompt {
            gateway.prompts().build_prompt(text, &options.template_id)?
        } else {
            text.to_string()
        };
        Some(gateway.score_note(&scored)?)
    } else {
        None
    };
    let dist = if options.probes.classify { Some(gateway.classify_los(text, &options.template_id)?) } else { None };
    Ok(TextProbe { score, dist })
}

/// Runs `f` over `0..n` on up to `workers` threads, handing each result to
/// `on_result` on the calling thread as it completes.
fn parallel_map<T, F, R>(n: usize, workers: usize, f: F, mut on_result: R)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    R: FnMut(usize, T),
{
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers.clamp(1, n.max(1)) {
            let (tx, next, f) = (tx.clone(), &next, &f);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n || tx.send((i, f(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, v) in rx {
            on_result(i, v);
        }
    });
}

/// Buffers out-of-order completions and releases them in index order.
pub struct OrderedSink<'a> {
    next: usize,
    pending: BTreeMap<usize, ProbeItem>,
    emit: &'a mut dyn FnMut(&ProbeItem),
    done: Vec<ProbeItem>,
}

impl<'a> OrderedSink<'a> {
    pub fn new(emit: &'a mut dyn FnMut(&ProbeItem)) -> Self {
        OrderedSink { next: 0, pending: BTreeMap::new(), emit, done: Vec::new() }
    }

    pub fn push(&mut self, index: usize, item: ProbeItem) {
        // a slot is filled at most once
        if index < self.next || self.pending.contains_key(&index) {
            return;
        }
        self.pending.insert(index, item);
        while let Some(item) = self.pending.remove(&self.next) {
            (self.emit)(&item);
            self.done.push(item);
            self.next += 1;
        }
    }

    pub fn into_items(self) -> Vec<ProbeItem> {
        self.done
    }
}

/// Probes every (original, counterfactual) pair. Each distinct original
/// text is probed once. Items reach `emit` in input order whatever the
/// completion order. More than half the pairs failing aborts the run with
/// the partial outcome attached.
pub fn run_probe_batch(
    gateway: &Gateway,
    pairs: &[CounterfactualNote],
    options: &BatchOptions,
    gold: Option<&HashMap<String, u8>>,
    emit: &mut dyn FnMut(&ProbeItem),
) -> Result<BatchOutcome, RunError> {
    let started = Instant::now();
    let workers = gateway.config().max_in_flight;

    let mut base_index: HashMap<&str, usize> = HashMap::new();
    let mut bases: Vec<&str> = Vec::new();
    for p in pairs {
        base_index.entry(p.base_text.as_str()).or_insert_with(|| {
            bases.push(p.base_text.as_str());
            bases.len() - 1
        });
    }
    let mut base_results: Vec<Option<Result<TextProbe, String>>> = vec![None; bases.len()];
    parallel_map(
        bases.len(),
        workers,
        |i| probe_text(gateway, bases[i], options).map_err(|e| e.to_string()),
        |i, r| base_results[i] = Some(r),
    );

    let mut sink = OrderedSink::new(emit);
    let model_tag = gateway.config().model_tag.clone();
    parallel_map(
        pairs.len(),
        workers,
        |i| {
            let pair = &pairs[i];
            let marker = |error: String| {
                ProbeItem::Failed(ErrorMarker {
                    base_note_id: pair.base_note_id.clone(),
                    spec_digest: pair.spec.digest(),
                    error,
                })
            };
            if !pair.validation.is_pass() {
                return marker("counterfactual did not pass validation".into());
            }
            let base = match base_results[base_index[pair.base_text.as_str()]].as_ref().expect("all bases probed") {
                Ok(b) => *b,
                Err(e) => return marker(format!("original: {e}")),
            };
            let cf = match probe_text(gateway, &pair.text, options) {
                Ok(c) => c,
                Err(e) => return marker(format!("counterfactual: {e}")),
            };
            ProbeItem::Record(EvalRecord {
                base_note_id: pair.base_note_id.clone(),
                spec: pair.spec.clone(),
                orig_mean_logprob: base.score.map(|s| s.mean_logprob),
                cf_mean_logprob: cf.score.map(|s| s.mean_logprob),
                orig_token_count: base.score.map(|s| s.token_count),
                cf_token_count: cf.score.map(|s| s.token_count),
                orig_dist: base.dist,
                cf_dist: cf.dist,
                model_tag: model_tag.clone(),
                setting_tag: pair.setting,
                gold_los_class: gold.and_then(|g| g.get(&pair.base_note_id).copied()),
            })
        },
        |i, item| sink.push(i, item),
    );

    let items = sink.into_items();
    let failed = items.iter().filter(|i| matches!(i, ProbeItem::Failed(_))).count();
    let outcome = BatchOutcome { items, stats: gateway.stats(), elapsed_ms: started.elapsed().as_millis() as u64 };
    if failed * 2 > pairs.len() {
        return Err(RunError { failed, total: pairs.len(), partial: Box::new(outcome) });
    }
    Ok(outcome)
}
