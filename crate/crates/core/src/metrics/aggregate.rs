//! Group-level summaries in the layout of the model comparison table, the
//! severity curves, the per-vital divergence table and the demographic
//! tables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{ClassLabel, SourceKind, Variable, VitalKind};
use crate::taxonomy::SeverityShift;

use super::behavior::{
    bin_values, monotonicity_pct, pct_corr_dir, positive_shift_stats, MonoRule, PairMetrics,
};
use super::classification::classification_scores;
use super::stats::{mean, one_sample_ttest, sample_std};
use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub by_model: bool,
    pub by_setting: bool,
}

impl Default for Grouping {
    fn default() -> Self {
        Grouping { by_model: true, by_setting: true }
    }
}

impl Grouping {
    /// Parses a comma-separated list of `model` and `setting`.
    pub fn parse(spec: &str) -> Result<Self, MetricError> {
        let mut g = Grouping { by_model: false, by_setting: false };
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "model" => g.by_model = true,
                "setting" => g.by_setting = true,
                other => return Err(MetricError::UnknownGrouping(other.to_string())),
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateOptions {
    #[serde(default)]
    pub mono_rule: MonoRule,
    #[serde(default)]
    pub grouping: Grouping,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions { mono_rule: MonoRule::Strict, grouping: Grouping::default() }
    }
}

/// One row of the model comparison table. Behavioral columns summarize
/// vital-sign counterfactuals; accuracy and F1 score the original notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub setting: String,
    pub accuracy: Option<f64>,
    pub macro_f1: Option<f64>,
    pub pct_delta_e_positive: Option<f64>,
    pub avg_delta_e_pos: Option<f64>,
    pub avg_delta_e_neg: Option<f64>,
    pub std_delta_e_pos: Option<f64>,
    pub std_delta_e_neg: Option<f64>,
    pub avg_jsd: Option<f64>,
    pub std_jsd: Option<f64>,
    pub pct_corr_dir: Option<f64>,
    pub pct_flip: Option<f64>,
    pub pct_mono: Option<f64>,
    pub top1_vital: Option<VitalKind>,
    pub mean_delta_loglik: Option<f64>,
    pub std_delta_loglik: Option<f64>,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub bin: i32,
    pub n_delta_e: usize,
    pub mean_delta_e: Option<f64>,
    pub n_delta_loglik: usize,
    pub mean_delta_loglik: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalJsd {
    pub vital: VitalKind,
    pub n: usize,
    pub mean_jsd: f64,
    pub std_jsd: Option<f64>,
}

/// Effect of moving patients into one demographic class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicRow {
    pub variable: Variable,
    pub class: String,
    pub n: usize,
    pub mean_delta_e: f64,
    pub std_delta_e: Option<f64>,
    pub p_value: Option<f64>,
    pub degenerate: bool,
    pub pct_flip: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub summary: SummaryRow,
    /// Always nine entries, bins -4..=4.
    pub severity_curve: Vec<BinSummary>,
    pub per_vital_jsd: Vec<VitalJsd>,
    pub demographics: Vec<DemographicRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub options: AggregateOptions,
    pub groups: Vec<GroupReport>,
}

pub const CSV_HEADER: [&str; 15] = [
    "model",
    "setting",
    "acc",
    "f1",
    "pct_delta_e_pos",
    "avg_delta_e_pos",
    "avg_delta_e_neg",
    "std_delta_e_pos",
    "std_delta_e_neg",
    "avg_jsd",
    "std_jsd",
    "pct_corr_dir",
    "pct_flip",
    "pct_mono",
    "top1_vital",
];

fn opt<T: Copy>(xs: &[T]) -> Option<&[T]> {
    (!xs.is_empty()).then_some(xs)
}

fn summarize(model: String, setting: String, records: &[&PairMetrics], rule: MonoRule) -> SummaryRow {
    let vitals: Vec<PairMetrics> = records.iter().filter(|r| r.target.as_vital().is_some()).map(|r| (*r).clone()).collect();
    let deltas: Vec<f64> = vitals.iter().filter_map(|r| r.delta_e).collect();
    let jsds: Vec<f64> = vitals.iter().filter_map(|r| r.jsd).collect();
    let flips: Vec<bool> = vitals.iter().filter_map(|r| r.flip).collect();
    let loglik: Vec<f64> = vitals.iter().filter_map(|r| r.delta_loglik).collect();
    let shift = opt(&deltas).map(positive_shift_stats);

    // one prediction per original note
    let mut originals: BTreeMap<&str, (u8, u8)> = BTreeMap::new();
    for r in records {
        if let (Some(p), Some(g)) = (r.orig_pred, r.gold) {
            originals.entry(r.base_note_id.as_str()).or_insert((p, g));
        }
    }
    let (pred, gold): (Vec<u8>, Vec<u8>) = originals.values().copied().unzip();
    let scores = classification_scores(&pred, &gold).ok();

    let top1_vital = VitalKind::ALL
        .into_iter()
        .filter_map(|k| {
            let v: Vec<f64> = vitals.iter().filter(|r| r.target.as_vital() == Some(k)).filter_map(|r| r.jsd).collect();
            mean(&v).filter(|m| *m > 0.0).map(|m| (k, m))
        })
        // first kind wins ties
        .fold(None, |best: Option<(VitalKind, f64)>, (k, m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((k, m)),
        })
        .map(|(k, _)| k);

    SummaryRow {
        model,
        setting,
        accuracy: scores.map(|s| s.accuracy),
        macro_f1: scores.map(|s| s.macro_f1),
        pct_delta_e_positive: shift.map(|s| s.pct_positive),
        avg_delta_e_pos: shift.and_then(|s| s.avg_pos),
        avg_delta_e_neg: shift.and_then(|s| s.avg_neg),
        std_delta_e_pos: shift.and_then(|s| s.std_pos),
        std_delta_e_neg: shift.and_then(|s| s.std_neg),
        avg_jsd: mean(&jsds),
        std_jsd: sample_std(&jsds),
        pct_corr_dir: pct_corr_dir(&vitals),
        pct_flip: opt(&flips).map(|f| 100.0 * f.iter().filter(|x| **x).count() as f64 / f.len() as f64),
        pct_mono: monotonicity_pct(&vitals, rule).ok(),
        top1_vital,
        mean_delta_loglik: mean(&loglik),
        std_delta_loglik: sample_std(&loglik),
        n_pairs: records.len(),
    }
}

fn severity_curve(records: &[PairMetrics]) -> Vec<BinSummary> {
    let de = bin_values(records, |r| r.delta_e);
    let ll = bin_values(records, |r| r.delta_loglik);
    (-SeverityShift::MAX_BIN..=SeverityShift::MAX_BIN)
        .map(|bin| {
            let d = de.get(&bin).map(Vec::as_slice).unwrap_or(&[]);
            let l = ll.get(&bin).map(Vec::as_slice).unwrap_or(&[]);
            BinSummary { bin, n_delta_e: d.len(), mean_delta_e: mean(d), n_delta_loglik: l.len(), mean_delta_loglik: mean(l) }
        })
        .collect()
}

fn per_vital_jsd(records: &[PairMetrics]) -> Vec<VitalJsd> {
    VitalKind::ALL
        .into_iter()
        .filter_map(|k| {
            let v: Vec<f64> = records.iter().filter(|r| r.target.as_vital() == Some(k)).filter_map(|r| r.jsd).collect();
            Some(VitalJsd { vital: k, n: v.len(), mean_jsd: mean(&v)?, std_jsd: sample_std(&v) })
        })
        .collect()
}

fn class_key(label: &ClassLabel) -> String {
    match label {
        ClassLabel::Gender(g) => g.as_str().to_string(),
        other => other.display_name(),
    }
}

/// Demographic rows, one per (variable, counterfactual class), with a
/// one-sample t-test of the changes in expected stay against zero.
pub fn demographic_rows(records: &[PairMetrics]) -> Vec<DemographicRow> {
    let mut groups: BTreeMap<(Variable, String), Vec<&PairMetrics>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.target.is_demographic()) {
        groups.entry((r.target, class_key(&r.target_class))).or_default().push(r);
    }
    groups
        .into_iter()
        .filter_map(|((variable, class), rs)| {
            let d: Vec<f64> = rs.iter().filter_map(|r| r.delta_e).collect();
            let flips: Vec<bool> = rs.iter().filter_map(|r| r.flip).collect();
            let test = one_sample_ttest(&d, 0.0).ok();
            Some(DemographicRow {
                variable,
                class,
                n: d.len(),
                mean_delta_e: mean(&d)?,
                std_delta_e: sample_std(&d),
                p_value: test.map(|t| t.p_two_sided),
                degenerate: test.is_some_and(|t| t.degenerate),
                pct_flip: 100.0 * flips.iter().filter(|x| **x).count() as f64 / flips.len().max(1) as f64,
            })
        })
        .collect()
}

/// Builds every report table. Records are put in a stable order first so
/// floating-point sums do not depend on input order.
pub fn aggregate(records: &[PairMetrics], options: &AggregateOptions) -> AggregateReport {
    let mut sorted: Vec<&PairMetrics> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.model_tag, a.setting.as_str(), &a.base_note_id, &a.spec_digest).cmp(&(
            &b.model_tag,
            b.setting.as_str(),
            &b.base_note_id,
            &b.spec_digest,
        ))
    });
    let key = |r: &PairMetrics| {
        (
            if options.grouping.by_model { r.model_tag.clone() } else { "all".into() },
            if options.grouping.by_setting { r.setting.as_str().to_string() } else { "all".into() },
        )
    };
    let keys: BTreeSet<(String, String)> = sorted.iter().map(|r| key(r)).collect();
    let groups = keys
        .into_iter()
        .map(|k| {
            let members: Vec<&PairMetrics> = sorted.iter().copied().filter(|r| key(r) == k).collect();
            let owned: Vec<PairMetrics> = members.iter().map(|r| (*r).clone()).collect();
            let vitals: Vec<PairMetrics> = owned.iter().filter(|r| r.target.as_vital().is_some()).cloned().collect();
            GroupReport {
                summary: summarize(k.0, k.1, &members, options.mono_rule),
                severity_curve: severity_curve(&vitals),
                per_vital_jsd: per_vital_jsd(&vitals),
                demographics: demographic_rows(&owned),
            }
        })
        .collect();
    AggregateReport { options: *options, groups }
}

fn fmt3(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3}")).unwrap_or_default()
}

fn fmt0(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.0}")).unwrap_or_default()
}

impl AggregateReport {
    /// Comparison table as CSV, one row per group. Reals use three decimals
    /// and percentages whole numbers; absent values are empty cells.
    pub fn to_csv(&self) -> Result<String, MetricError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(|e| MetricError::Io(e.to_string()))?;
        for g in &self.groups {
            let s = &g.summary;
            w.write_record([
                s.model.clone(),
                s.setting.clone(),
                fmt3(s.accuracy),
                fmt3(s.macro_f1),
                fmt0(s.pct_delta_e_positive),
                fmt3(s.avg_delta_e_pos),
                fmt3(s.avg_delta_e_neg),
                fmt3(s.std_delta_e_pos),
                fmt3(s.std_delta_e_neg),
                fmt3(s.avg_jsd),
                fmt3(s.std_jsd),
                fmt0(s.pct_corr_dir),
                fmt0(s.pct_flip),
                fmt0(s.pct_mono),
                s.top1_vital.map(|k| k.display_name().to_string()).unwrap_or_default(),
            ])
            .map_err(|e| MetricError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| MetricError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Severity curves keyed by group, for plotting mean change against bin.
    pub fn severity_json(&self) -> serde_json::Value {
        self.per_group(|g| serde_json::to_value(&g.severity_curve))
    }

    pub fn vital_jsd_json(&self) -> serde_json::Value {
        self.per_group(|g| serde_json::to_value(&g.per_vital_jsd))
    }

    pub fn demographic_json(&self) -> serde_json::Value {
        self.per_group(|g| serde_json::to_value(&g.demographics))
    }

    fn per_group<F>(&self, f: F) -> serde_json::Value
    where
        F: Fn(&GroupReport) -> Result<serde_json::Value, serde_json::Error>,
    {
        let mut out = serde_json::Map::new();
        for g in &self.groups {
            let key = format!("{}/{}", g.summary.model, g.summary.setting);
            out.insert(key, f(g).expect("report tables serialize"));
        }
        serde_json::Value::Object(out)
    }

    pub fn group(&self, model: &str, setting: SourceKind) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.summary.model == model && g.summary.setting == setting.as_str())
    }
}
