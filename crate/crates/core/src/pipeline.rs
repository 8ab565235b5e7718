//! In-memory pipeline stages and the JSONL line types that connect them.
//! The command-line front end wraps these with file handling.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::generate::split_validated;
use crate::engine::{
    generate_counterfactuals, generate_template_counterfactuals, note_variable_seed, synthesize_template, validate_pair,
    EngineError, GenerateOptions, RewriteError, ValidationStatus,
};
use crate::metrics::{aggregate, pair_metrics, AggregateOptions, AggregateReport, MetricError, PairMetrics};
use crate::model::{
    canonical_json, to_canonical_line, ClinicalNote, CounterfactualNote, DemographicProfile, EvalRecord, ManifestEntry,
    ModelError, SourceKind, Variable, VitalSet,
};
use crate::parser::{admission_only, extract, parse_sections, ExtractionReport};
use crate::taxonomy::LosReference;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One line of a notes file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteInput {
    pub note_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structured: Option<DemographicProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_los_class: Option<u8>,
}

/// One line of a sectioned-notes file: the admission-only note and what
/// was extracted from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedNote {
    pub note: ClinicalNote,
    pub extraction: ExtractionReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structured: Option<DemographicProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_los_class: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteFailure {
    pub note_id: String,
    pub error: String,
}

pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| PipelineError::Line { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, items: &[T]) -> Result<(), PipelineError> {
    for item in items {
        writeln!(writer, "{}", to_canonical_line(item)?)?;
    }
    Ok(())
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String, PipelineError> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, items)?;
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

/// Sections and extracts one note.
pub fn parse_note(input: &NoteInput) -> Result<ParsedNote, String> {
    let full = parse_sections(&input.note_id, &input.text).map_err(|e| e.to_string())?;
    let note = admission_only(&full);
    let extraction = extract(&note, input.structured.as_ref()).map_err(|e| e.to_string())?;
    Ok(ParsedNote { note, extraction, structured: input.structured, gold_los_class: input.gold_los_class })
}

pub fn parse_notes(inputs: &[NoteInput]) -> (Vec<ParsedNote>, Vec<NoteFailure>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for input in inputs {
        match parse_note(input) {
            Ok(p) => ok.push(p),
            Err(error) => failed.push(NoteFailure { note_id: input.note_id.clone(), error }),
        }
    }
    (ok, failed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactOptions {
    pub variables: Vec<Variable>,
    pub seed: u64,
    pub settings: Vec<SourceKind>,
    pub generate: GenerateOptions,
}

impl Default for CounterfactOptions {
    fn default() -> Self {
        CounterfactOptions {
            variables: Variable::ALL.to_vec(),
            seed: 0,
            settings: vec![SourceKind::Raw, SourceKind::Template],
            generate: GenerateOptions::default(),
        }
    }
}

/// Per-variable counts of one counterfactual run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableCounts {
    /// Notes that carry the variable.
    pub notes: usize,
    pub raw: usize,
    pub template: usize,
    pub flagged: usize,
    /// Notes without the variable.
    pub missing: usize,
    /// Notes whose raw text has no editable mention; only the template
    /// setting is produced for them.
    pub template_only: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactOutput {
    pub manifest: Vec<ManifestEntry>,
    pub quarantine: Vec<ManifestEntry>,
    pub counts: BTreeMap<String, VariableCounts>,
}

impl CounterfactOutput {
    /// One summary line per variable.
    pub fn summary_lines(&self) -> Vec<String> {
        self.counts
            .iter()
            .map(|(v, c)| {
                format!(
                    "{v}: {} counterfactuals from {} notes (raw {}, template {}), {} flagged, {} missing, {} template-only",
                    c.raw + c.template,
                    c.notes,
                    c.raw,
                    c.template,
                    c.flagged,
                    c.missing,
                    c.template_only
                )
            })
            .collect()
    }
}

/// Demographics and vitals used for template rendering.
fn template_inputs(p: &ParsedNote) -> (DemographicProfile, VitalSet) {
    (p.structured.unwrap_or(p.extraction.demographics), p.extraction.vitals.clone())
}

/// Generates and validates counterfactuals for every note and variable.
/// Raw notes with no editable mention fall back to the template setting.
pub fn counterfactuals(notes: &[ParsedNote], options: &CounterfactOptions) -> Result<CounterfactOutput, EngineError> {
    let mut all = Vec::new();
    let mut counts: BTreeMap<String, VariableCounts> = BTreeMap::new();
    for &variable in &options.variables {
        let c = counts.entry(variable.as_str().to_string()).or_default();
        for p in notes {
            let seed = note_variable_seed(options.seed, &p.note.note_id, variable);
            let mut produced = false;
            if options.settings.contains(&SourceKind::Raw) {
                match generate_counterfactuals(&p.note, &p.extraction, variable, seed, &options.generate) {
                    Ok(cfs) => {
                        c.raw += cfs.len();
                        produced = true;
                        all.extend(cfs);
                    }
                    Err(EngineError::VariableMissing(_)) => {}
                    Err(EngineError::Rewrite(RewriteError::NoSurfaceForm)) => c.template_only += 1,
                    Err(e) => return Err(e),
                }
            }
            if options.settings.contains(&SourceKind::Template) {
                let (profile, vitals) = template_inputs(p);
                match generate_template_counterfactuals(&p.note.note_id, &profile, &vitals, variable, seed) {
                    Ok(cfs) => {
                        c.template += cfs.len();
                        produced = true;
                        all.extend(cfs);
                    }
                    Err(EngineError::VariableMissing(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            if produced {
                c.notes += 1;
            } else {
                c.missing += 1;
            }
        }
    }
    let (pass, flagged) = split_validated(all);
    for f in &flagged {
        counts.entry(f.spec.target.as_str().to_string()).or_default().flagged += 1;
    }
    Ok(CounterfactOutput {
        manifest: pass.into_iter().map(ManifestEntry::from).collect(),
        quarantine: flagged.into_iter().map(ManifestEntry::from).collect(),
        counts,
    })
}

/// One line of a template-notes file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateNote {
    pub note: ClinicalNote,
    pub structured: DemographicProfile,
    pub vitals: VitalSet,
}

pub fn template_notes(notes: &[ParsedNote]) -> Vec<TemplateNote> {
    notes
        .iter()
        .map(|p| {
            let (structured, vitals) = template_inputs(p);
            let note = synthesize_template(&p.note.note_id, &structured, &vitals);
            TemplateNote { note, structured, vitals }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationLine {
    pub base_note_id: String,
    pub spec_digest: String,
    pub status: ValidationStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Stored digests still match the entry.
    pub digests_ok: bool,
}

/// Re-validates manifest entries from their texts.
pub fn revalidate(entries: &[ManifestEntry]) -> Vec<ValidationLine> {
    entries
        .iter()
        .map(|e| {
            let report = validate_pair(&e.note.base_text, &e.note.text, &e.note.spec);
            let fresh = ManifestEntry::from(e.note.clone());
            ValidationLine {
                base_note_id: e.note.base_note_id.clone(),
                spec_digest: e.spec_digest.clone(),
                status: report.status,
                reason: report.reason,
                digests_ok: fresh.text_digest == e.text_digest && fresh.spec_digest == e.spec_digest,
            }
        })
        .collect()
}

/// Counterfactual notes of a manifest, in manifest order.
pub fn manifest_pairs(entries: &[ManifestEntry]) -> Vec<CounterfactualNote> {
    entries.iter().map(|e| e.note.clone()).collect()
}

pub fn gold_map(notes: &[NoteInput]) -> HashMap<String, u8> {
    notes.iter().filter_map(|n| n.gold_los_class.map(|g| (n.note_id.clone(), g))).collect()
}

/// Rendered report files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub summary_csv: String,
    pub severity_json: String,
    pub vital_jsd_json: String,
    pub demographics_json: String,
}

impl ReportFiles {
    pub fn named(&self) -> [(&'static str, &str); 4] {
        [
            ("summary.csv", &self.summary_csv),
            ("severity.json", &self.severity_json),
            ("vital_jsd.json", &self.vital_jsd_json),
            ("demographics.json", &self.demographics_json),
        ]
    }
}

pub fn metrics_of(records: &[EvalRecord], reference: &LosReference) -> Result<Vec<PairMetrics>, MetricError> {
    records.iter().map(|r| pair_metrics(r, reference)).collect()
}

pub fn report(
    records: &[EvalRecord],
    reference: &LosReference,
    options: &AggregateOptions,
) -> Result<(AggregateReport, ReportFiles), PipelineError> {
    let metrics = metrics_of(records, reference)?;
    let agg = aggregate(&metrics, options);
    let pretty = |v: serde_json::Value| format!("{}\n", serde_json::to_string_pretty(&v).expect("value serializes"));
    let files = ReportFiles {
        summary_csv: agg.to_csv()?,
        severity_json: pretty(agg.severity_json()),
        vital_jsd_json: pretty(agg.vital_jsd_json()),
        demographics_json: pretty(agg.demographic_json()),
    };
    Ok((agg, files))
}

/// Canonical single-line JSON of any serializable value.
pub fn canonical<T: Serialize>(value: &T) -> String {
    canonical_json(&serde_json::to_value(value).expect("value serializes"))
}
