//! Per-pair behavioral metrics and their severity-axis summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{ClassLabel, EvalRecord, SourceKind, Variable};
use crate::taxonomy::{LosReference, SeverityShift};

use super::divergence::{delta_e, is_flip, jsd};
use super::stats::{mean, sample_std};
use super::MetricError;

/// Metrics of one (original, counterfactual) pair. Distribution-derived
/// fields are absent when the pair was probed by scoring only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub base_note_id: String,
    pub spec_digest: String,
    pub model_tag: String,
    pub setting: SourceKind,
    pub target: Variable,
    pub target_class: ClassLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jsd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_loglik: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<SeverityShift>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orig_pred: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<u8>,
}

pub fn pair_metrics(record: &EvalRecord, reference: &LosReference) -> Result<PairMetrics, MetricError> {
    record.validate()?;
    let dists = record.orig_dist.zip(record.cf_dist);
    let m = PairMetrics {
        base_note_id: record.base_note_id.clone(),
        spec_digest: record.spec.digest(),
        model_tag: record.model_tag.clone(),
        setting: record.setting_tag,
        target: record.spec.target,
        target_class: record.spec.target_class,
        jsd: dists.map(|(p, q)| jsd(&p, &q)),
        delta_e: dists.map(|(p, q)| delta_e(&p, &q, reference)),
        flip: dists.map(|(p, q)| is_flip(&p, &q)),
        delta_loglik: record.orig_mean_logprob.zip(record.cf_mean_logprob).map(|(o, c)| c - o),
        severity: record.spec.severity,
        orig_pred: record.orig_dist.map(|d| d.argmax()),
        gold: record.gold_los_class,
    };
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Correct,
    Incorrect,
    Excluded,
}

/// Whether the change in expected stay follows the severity change. Pairs
/// without a severity change are excluded; a zero change against a nonzero
/// severity change counts as incorrect.
pub fn corr_dir(delta_e: f64, shift: &SeverityShift) -> Direction {
    if shift.shift_raw == 0 {
        Direction::Excluded
    } else if delta_e != 0.0 && delta_e.signum() == (shift.shift_raw as f64).signum() {
        Direction::Correct
    } else {
        Direction::Incorrect
    }
}

/// Percentage of correct directions among non-excluded pairs.
pub fn pct_corr_dir(records: &[PairMetrics]) -> Option<f64> {
    let (mut ok, mut total) = (0usize, 0usize);
    for r in records {
        let (Some(d), Some(s)) = (r.delta_e, r.severity) else { continue };
        match corr_dir(d, &s) {
            Direction::Correct => {
                ok += 1;
                total += 1;
            }
            Direction::Incorrect => total += 1,
            Direction::Excluded => {}
        }
    }
    (total > 0).then(|| 100.0 * ok as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonoRule {
    /// Means must not decrease, and bins on either side of zero must carry
    /// the matching sign.
    #[default]
    Strict,
    /// Means must not decrease.
    TrendOnly,
}

/// Values grouped by binned severity shift, -4..=4.
pub fn bin_values<F>(records: &[PairMetrics], value: F) -> BTreeMap<i32, Vec<f64>>
where
    F: Fn(&PairMetrics) -> Option<f64>,
{
    let mut bins: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for r in records {
        if let (Some(s), Some(v)) = (r.severity, value(r)) {
            bins.entry(s.shift_binned).or_default().push(v);
        }
    }
    bins
}

pub fn bin_means<F>(records: &[PairMetrics], value: F) -> BTreeMap<i32, f64>
where
    F: Fn(&PairMetrics) -> Option<f64>,
{
    bin_values(records, value).into_iter().map(|(k, v)| (k, mean(&v).expect("bins are non-empty"))).collect()
}

/// Share of consecutive occupied-bin steps that follow the expected signed
/// trend, from a map of bin to mean change in expected stay.
pub fn monotonicity_from_means(means: &BTreeMap<i32, f64>, rule: MonoRule) -> Result<f64, MetricError> {
    if means.len() < 2 {
        return Err(MetricError::InsufficientBins);
    }
    let bins: Vec<(i32, f64)> = means.iter().map(|(k, v)| (*k, *v)).collect();
    let steps = bins.len() - 1;
    let correct = bins
        .windows(2)
        .filter(|w| {
            let ((k, mk), (k2, mk2)) = (w[0], w[1]);
            let trend = mk2 >= mk;
            match rule {
                MonoRule::TrendOnly => trend,
                MonoRule::Strict => trend && (k2 <= 0 || mk2 > 0.0) && (k >= 0 || mk < 0.0),
            }
        })
        .count();
    Ok(100.0 * correct as f64 / steps as f64)
}

pub fn monotonicity_pct(records: &[PairMetrics], rule: MonoRule) -> Result<f64, MetricError> {
    monotonicity_from_means(&bin_means(records, |r| r.delta_e), rule)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftStats {
    pub pct_positive: f64,
    pub avg_pos: Option<f64>,
    pub avg_neg: Option<f64>,
    pub std_pos: Option<f64>,
    pub std_neg: Option<f64>,
}

/// Splits changes in expected stay by sign. Zeros join neither side but
/// count in the denominator of the positive share.
pub fn positive_shift_stats(deltas: &[f64]) -> ShiftStats {
    let pos: Vec<f64> = deltas.iter().copied().filter(|d| *d > 0.0).collect();
    let neg: Vec<f64> = deltas.iter().copied().filter(|d| *d < 0.0).collect();
    ShiftStats {
        pct_positive: if deltas.is_empty() { 0.0 } else { 100.0 * pos.len() as f64 / deltas.len() as f64 },
        avg_pos: mean(&pos),
        avg_neg: mean(&neg),
        std_pos: sample_std(&pos),
        std_neg: sample_std(&neg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoglikStats {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub per_bin: BTreeMap<i32, f64>,
}

pub fn delta_loglik_stats(records: &[PairMetrics]) -> LoglikStats {
    let all: Vec<f64> = records.iter().filter_map(|r| r.delta_loglik).collect();
    LoglikStats { mean: mean(&all), std: sample_std(&all), per_bin: bin_means(records, |r| r.delta_loglik) }
}
