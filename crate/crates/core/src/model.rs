//! Shared domain types and the JSONL record schema.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::taxonomy::{self, AgeClass, SeverityShift, TaxonomyError, VitalClassLabel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-finite real in field `{0}`")]
    NonFinite(String),
    #[error("no probe payload")]
    NoProbePayload,
    #[error("invalid LOS distribution: {0}")]
    Distribution(String),
    #[error("invalid note: {0}")]
    Note(String),
    #[error("invalid value: {0}")]
    Value(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for ModelError {
    fn from(e: serde_json::Error) -> Self {
        ModelError::Json(e.to_string())
    }
}

/// Half-open byte range `[start, end)` into a UTF-8 document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn shifted(&self, offset: usize) -> Span {
        Span::new(self.start + offset, self.end + offset)
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Self {
        Span { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(s: Span) -> Self {
        (s.start, s.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    ChiefComplaint,
    PresentIllness,
    MedicalHistory,
    AdmissionMedications,
    Allergies,
    PhysicalExam,
    FamilyHistory,
    SocialHistory,
}

impl SectionKind {
    pub const ALL: [SectionKind; 8] = [
        SectionKind::ChiefComplaint,
        SectionKind::PresentIllness,
        SectionKind::MedicalHistory,
        SectionKind::AdmissionMedications,
        SectionKind::Allergies,
        SectionKind::PhysicalExam,
        SectionKind::FamilyHistory,
        SectionKind::SocialHistory,
    ];

    /// Header used when re-rendering an admission-only note.
    pub fn canonical_header(self) -> &'static str {
        match self {
            SectionKind::ChiefComplaint => "CHIEF COMPLAINT",
            SectionKind::PresentIllness => "PRESENT ILLNESS",
            SectionKind::MedicalHistory => "MEDICAL HISTORY",
            SectionKind::AdmissionMedications => "MEDICATION ON ADMISSION",
            SectionKind::Allergies => "ALLERGIES",
            SectionKind::PhysicalExam => "PHYSICAL EXAM",
            SectionKind::FamilyHistory => "FAMILY HISTORY",
            SectionKind::SocialHistory => "SOCIAL HISTORY",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteSection {
    pub kind: SectionKind,
    pub text: String,
    pub char_span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Raw,
    Template,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Raw => "raw",
            SourceKind::Template => "template",
        }
    }
}

/// A note split into admission-time sections. Section texts are byte-exact
/// slices of `raw_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalNote {
    pub note_id: String,
    pub sections: Vec<NoteSection>,
    pub source_kind: SourceKind,
    pub raw_text: String,
}

impl ClinicalNote {
    pub fn new(
        note_id: impl Into<String>,
        sections: Vec<NoteSection>,
        source_kind: SourceKind,
        raw_text: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let note = ClinicalNote { note_id: note_id.into(), sections, source_kind, raw_text: raw_text.into() };
        note.validate()?;
        Ok(note)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, s) in self.sections.iter().enumerate() {
            if s.char_span.start >= s.char_span.end {
                return Err(ModelError::Note(format!("empty span for {:?}", s.kind)));
            }
            match self.raw_text.get(s.char_span.start..s.char_span.end) {
                Some(slice) if slice == s.text => {}
                _ => return Err(ModelError::Note(format!("section {:?} text does not match its span", s.kind))),
            }
            if self.sections[..i].iter().any(|o| o.char_span.overlaps(&s.char_span)) {
                return Err(ModelError::Note(format!("section {:?} overlaps another section", s.kind)));
            }
        }
        Ok(())
    }

    pub fn section(&self, kind: SectionKind) -> Option<&NoteSection> {
        self.sections.iter().find(|s| s.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::F => Gender::M,
            Gender::M => Gender::F,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ethnicity {
    AsianPacific,
    Black,
    HispanicLatino,
    OtherUnknown,
    White,
}

impl Ethnicity {
    pub const ALL: [Ethnicity; 5] = [
        Ethnicity::AsianPacific,
        Ethnicity::Black,
        Ethnicity::HispanicLatino,
        Ethnicity::OtherUnknown,
        Ethnicity::White,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Ethnicity::AsianPacific => "Asian & Pacific",
            Ethnicity::Black => "Black",
            Ethnicity::HispanicLatino => "Hispanic/Latino",
            Ethnicity::OtherUnknown => "Other/Unknown",
            Ethnicity::White => "White",
        }
    }

    /// Surface forms accepted in note text, preferred form first.
    pub fn surface_forms(self) -> &'static [&'static str] {
        match self {
            Ethnicity::AsianPacific => &["Asian & Pacific", "Asian/Pacific", "Asian"],
            Ethnicity::Black => &["Black"],
            Ethnicity::HispanicLatino => &["Hispanic/Latino", "Hispanic", "Latino"],
            Ethnicity::OtherUnknown => &["Other/Unknown"],
            Ethnicity::White => &["White"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DemographicProfile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_years: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ethnicity: Option<Ethnicity>,
}

impl DemographicProfile {
    pub fn new(age_years: Option<u8>, gender: Option<Gender>, ethnicity: Option<Ethnicity>) -> Result<Self, ModelError> {
        let p = DemographicProfile { age_years, gender, ethnicity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(a) = self.age_years {
            taxonomy::classify_age(a as i64)?;
        }
        Ok(())
    }

    pub fn age_class(&self) -> Option<AgeClass> {
        self.age_years.and_then(|a| taxonomy::classify_age(a as i64).ok())
    }

    pub fn value_of(&self, variable: Variable) -> Option<VariableValue> {
        match variable {
            Variable::Age => self.age_years.map(VariableValue::Age),
            Variable::Gender => self.gender.map(VariableValue::Gender),
            Variable::Ethnicity => self.ethnicity.map(VariableValue::Ethnicity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VitalKind {
    HeartRate,
    RespirationRate,
    OxygenSaturation,
    Temperature,
    BloodPressure,
}

impl VitalKind {
    pub const ALL: [VitalKind; 5] = [
        VitalKind::HeartRate,
        VitalKind::RespirationRate,
        VitalKind::OxygenSaturation,
        VitalKind::Temperature,
        VitalKind::BloodPressure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VitalKind::HeartRate => "heart_rate",
            VitalKind::RespirationRate => "respiration_rate",
            VitalKind::OxygenSaturation => "oxygen_saturation",
            VitalKind::Temperature => "temperature",
            VitalKind::BloodPressure => "blood_pressure",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            VitalKind::HeartRate => "heart rate",
            VitalKind::RespirationRate => "respiration rate",
            VitalKind::OxygenSaturation => "oxygen saturation",
            VitalKind::Temperature => "temperature",
            VitalKind::BloodPressure => "blood pressure",
        }
    }

    /// Native units per step: tenths of a degree for temperature, whole
    /// units otherwise.
    pub fn steps_per_unit(self) -> i64 {
        match self {
            VitalKind::Temperature => 10,
            _ => 1,
        }
    }

    pub fn from_steps(self, steps: i64) -> f64 {
        steps as f64 / self.steps_per_unit() as f64
    }

    pub fn to_steps(self, v: f64) -> Option<i64> {
        let steps = (v * self.steps_per_unit() as f64).round();
        (self.from_steps(steps as i64) == v).then_some(steps as i64)
    }
}

impl fmt::Display for VitalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VitalValue {
    Scalar(f64),
    Pair { systolic: f64, diastolic: f64 },
}

impl VitalValue {
    pub fn pair(systolic: f64, diastolic: f64) -> Self {
        VitalValue::Pair { systolic, diastolic }
    }

    /// Decimal rendering at the kind's native resolution.
    pub fn render(&self, kind: VitalKind) -> String {
        match *self {
            VitalValue::Scalar(v) if kind == VitalKind::Temperature => format!("{v:.1}"),
            VitalValue::Scalar(v) => format!("{v:.0}"),
            VitalValue::Pair { systolic, diastolic } => format!("{systolic:.0}/{diastolic:.0}"),
        }
    }

    pub fn components(&self) -> Vec<f64> {
        match *self {
            VitalValue::Scalar(v) => vec![v],
            VitalValue::Pair { systolic, diastolic } => vec![systolic, diastolic],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VitalReading {
    pub kind: VitalKind,
    pub value: VitalValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_span: Option<Span>,
}

impl VitalReading {
    /// Fails unless the value has the kind's shape and resolution and falls
    /// inside one of its classes.
    pub fn new(kind: VitalKind, value: VitalValue, source_span: Option<Span>) -> Result<Self, ModelError> {
        for c in value.components() {
            if !c.is_finite() || c <= 0.0 {
                return Err(ModelError::Value(format!("{kind} component {c} must be positive")));
            }
            if kind.to_steps(c).is_none() {
                return Err(ModelError::Value(format!("{kind} value {c} is finer than native resolution")));
            }
        }
        taxonomy::classify_vital(kind, &value)?;
        Ok(VitalReading { kind, value, source_span })
    }

    pub fn severity(&self) -> i32 {
        taxonomy::classify_vital(self.kind, &self.value).map(|(_, s)| s).unwrap_or(0)
    }
}

/// At most one reading per vital kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VitalSet {
    readings: BTreeMap<VitalKind, VitalReading>,
}

impl VitalSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a reading, returning the one it displaced.
    pub fn insert(&mut self, reading: VitalReading) -> Option<VitalReading> {
        self.readings.insert(reading.kind, reading)
    }

    pub fn get(&self, kind: VitalKind) -> Option<&VitalReading> {
        self.readings.get(&kind)
    }

    pub fn iter(&self) -> impl Iterator<Item = &VitalReading> {
        self.readings.values()
    }

    pub fn missing(&self) -> impl Iterator<Item = VitalKind> + '_ {
        VitalKind::ALL.into_iter().filter(|k| !self.readings.contains_key(k))
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn severity_sum(&self) -> i32 {
        self.iter().map(VitalReading::severity).sum()
    }

    pub fn with_value(&self, kind: VitalKind, value: VitalValue) -> Result<VitalSet, ModelError> {
        let mut out = self.clone();
        out.insert(VitalReading::new(kind, value, None)?);
        Ok(out)
    }
}

/// One of the eight perturbable clinical variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Age,
    Gender,
    Ethnicity,
    HeartRate,
    RespirationRate,
    OxygenSaturation,
    Temperature,
    BloodPressure,
}

impl Variable {
    pub const ALL: [Variable; 8] = [
        Variable::Age,
        Variable::Gender,
        Variable::Ethnicity,
        Variable::HeartRate,
        Variable::RespirationRate,
        Variable::OxygenSaturation,
        Variable::Temperature,
        Variable::BloodPressure,
    ];

    pub fn as_vital(self) -> Option<VitalKind> {
        match self {
            Variable::HeartRate => Some(VitalKind::HeartRate),
            Variable::RespirationRate => Some(VitalKind::RespirationRate),
            Variable::OxygenSaturation => Some(VitalKind::OxygenSaturation),
            Variable::Temperature => Some(VitalKind::Temperature),
            Variable::BloodPressure => Some(VitalKind::BloodPressure),
            _ => None,
        }
    }

    pub fn is_demographic(self) -> bool {
        self.as_vital().is_none()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Age => "age",
            Variable::Gender => "gender",
            Variable::Ethnicity => "ethnicity",
            v => v.as_vital().map(VitalKind::as_str).unwrap_or_default(),
        }
    }

    pub fn parse(name: &str) -> Option<Variable> {
        Variable::ALL.into_iter().find(|v| v.as_str() == name)
    }
}

impl From<VitalKind> for Variable {
    fn from(k: VitalKind) -> Self {
        match k {
            VitalKind::HeartRate => Variable::HeartRate,
            VitalKind::RespirationRate => Variable::RespirationRate,
            VitalKind::OxygenSaturation => Variable::OxygenSaturation,
            VitalKind::Temperature => Variable::Temperature,
            VitalKind::BloodPressure => Variable::BloodPressure,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableValue {
    Age(u8),
    Gender(Gender),
    Ethnicity(Ethnicity),
    Vital(VitalValue),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Age(AgeClass),
    Gender(Gender),
    Ethnicity(Ethnicity),
    Vital(VitalClassLabel),
}

impl ClassLabel {
    pub fn display_name(&self) -> String {
        match self {
            ClassLabel::Age(a) => a.display_name().to_string(),
            ClassLabel::Gender(g) => g.as_str().to_string(),
            ClassLabel::Ethnicity(e) => e.label().to_string(),
            ClassLabel::Vital(v) => v.display_name().to_string(),
        }
    }
}

/// The single intended edit of a counterfactual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualSpec {
    pub target: Variable,
    pub original_value: VariableValue,
    pub counterfactual_value: VariableValue,
    pub target_class: ClassLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<SeverityShift>,
    pub rng_seed: u64,
    /// Location of the original value in the base text, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_span: Option<Span>,
}

impl CounterfactualSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Value(m.to_string()));
        match (self.target.as_vital(), &self.counterfactual_value, self.target_class) {
            (Some(kind), VariableValue::Vital(v), ClassLabel::Vital(label)) => {
                let (class, _) = taxonomy::classify_vital(kind, v)?;
                if class.label != label {
                    return bad("counterfactual value outside target class");
                }
                match self.severity {
                    Some(s) if s.is_consistent() => Ok(()),
                    _ => bad("vital counterfactual needs a consistent severity shift"),
                }
            }
            (None, value, class) => {
                if self.severity.is_some() {
                    return bad("demographic counterfactual carries a severity shift");
                }
                let ok = match (self.target, value, class) {
                    (Variable::Age, VariableValue::Age(a), ClassLabel::Age(c)) => {
                        taxonomy::classify_age(*a as i64)? == c
                    }
                    (Variable::Gender, VariableValue::Gender(g), ClassLabel::Gender(c)) => *g == c,
                    (Variable::Ethnicity, VariableValue::Ethnicity(e), ClassLabel::Ethnicity(c)) => *e == c,
                    _ => false,
                };
                if ok {
                    Ok(())
                } else {
                    bad("demographic value does not match its class")
                }
            }
            _ => bad("target, value and class kinds disagree"),
        }
    }

    /// Stable digest used to key records of this spec.
    pub fn digest(&self) -> String {
        sha256_hex(&canonical_json(&serde_json::to_value(self).expect("spec serializes")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    Unvalidated,
    Pass,
    Flagged(String),
}

impl Validation {
    pub fn is_pass(&self) -> bool {
        matches!(self, Validation::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualNote {
    pub base_note_id: String,
    pub setting: SourceKind,
    pub spec: CounterfactualSpec,
    /// Text the counterfactual is paired with. Equals the source note except
    /// when a masked age is materialized for an age edit.
    pub base_text: String,
    pub text: String,
    pub validation: Validation,
}

/// One line of a counterfactual manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub note: CounterfactualNote,
    pub text_digest: String,
    pub spec_digest: String,
}

impl From<CounterfactualNote> for ManifestEntry {
    fn from(note: CounterfactualNote) -> Self {
        ManifestEntry { text_digest: sha256_hex(&note.text), spec_digest: note.spec.digest(), note }
    }
}

/// Probability vector over LOS classes 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LosDistribution {
    probs: [f64; 4],
}

impl LosDistribution {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn new(probs: [f64; 4]) -> Result<Self, ModelError> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ModelError::Distribution(format!("entries must be finite and non-negative: {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::TOLERANCE {
            return Err(ModelError::Distribution(format!("sums to {total}")));
        }
        Ok(LosDistribution { probs })
    }

    pub fn one_hot(class_id: u8) -> Self {
        let mut probs = [0.0; 4];
        probs[(class_id.clamp(1, 4) - 1) as usize] = 1.0;
        LosDistribution { probs }
    }

    pub fn uniform() -> Self {
        LosDistribution { probs: [0.25; 4] }
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    /// Most probable class 1..=4; ties go to the lowest index.
    pub fn argmax(&self) -> u8 {
        let mut best = 0;
        for i in 1..4 {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        best as u8 + 1
    }
}

impl TryFrom<[f64; 4]> for LosDistribution {
    type Error = ModelError;
    fn try_from(p: [f64; 4]) -> Result<Self, Self::Error> {
        LosDistribution::new(p)
    }
}

impl From<LosDistribution> for [f64; 4] {
    fn from(d: LosDistribution) -> Self {
        d.probs
    }
}

/// Outcome of probing one (original, counterfactual) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub base_note_id: String,
    pub spec: CounterfactualSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orig_mean_logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_mean_logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orig_token_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_token_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orig_dist: Option<LosDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_dist: Option<LosDistribution>,
    pub model_tag: String,
    pub setting_tag: SourceKind,
    /// Gold LOS class of the base note, when the corpus provides one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_los_class: Option<u8>,
}

impl EvalRecord {
    pub fn has_logprobs(&self) -> bool {
        self.orig_mean_logprob.is_some() && self.cf_mean_logprob.is_some()
    }

    pub fn has_distributions(&self) -> bool {
        self.orig_dist.is_some() && self.cf_dist.is_some()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.has_logprobs() && !self.has_distributions() {
            return Err(ModelError::NoProbePayload);
        }
        for (name, v) in [("orig_mean_logprob", self.orig_mean_logprob), ("cf_mean_logprob", self.cf_mean_logprob)] {
            if matches!(v, Some(x) if !x.is_finite()) {
                return Err(ModelError::NonFinite(name.into()));
            }
        }
        for (name, d) in [("orig_dist", self.orig_dist), ("cf_dist", self.cf_dist)] {
            if let Some(d) = d {
                if d.probs.iter().any(|p| !p.is_finite()) {
                    return Err(ModelError::NonFinite(name.into()));
                }
            }
        }
        Ok(())
    }
}

/// Renders a JSON value with object keys in sorted order.
pub fn canonical_json(value: &serde_json::Value) -> String {
    // serde_json's default map is ordered by key
    serde_json::to_string(value).expect("value serializes")
}

pub fn to_canonical_line<T: Serialize>(value: &T) -> Result<String, ModelError> {
    Ok(canonical_json(&serde_json::to_value(value)?))
}

pub fn serialize_record(record: &EvalRecord) -> Result<String, ModelError> {
    record.validate()?;
    to_canonical_line(record)
}

pub fn deserialize_record(line: &str) -> Result<EvalRecord, ModelError> {
    let record: EvalRecord = serde_json::from_str(line)?;
    record.validate()?;
    Ok(record)
}

pub fn sha256_hex(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}
