//! Admission-note sectioning and rule-based extraction of vitals and
//! demographics with exact source spans.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ClinicalNote, DemographicProfile, Ethnicity, Gender, NoteSection, SectionKind, SourceKind, Span, VitalKind, VitalReading,
    VitalSet, VitalValue,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no admission sections")]
    NoAdmissionSections,
    #[error("empty note")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("gender ambiguous")]
    GenderAmbiguous,
}

const ADMISSION_HEADERS: &[(&str, SectionKind)] = &[
    ("chief complaint", SectionKind::ChiefComplaint),
    ("history of present illness", SectionKind::PresentIllness),
    ("present illness", SectionKind::PresentIllness),
    ("hpi", SectionKind::PresentIllness),
    ("past medical history", SectionKind::MedicalHistory),
    ("medical history", SectionKind::MedicalHistory),
    ("pmh", SectionKind::MedicalHistory),
    ("medications on admission", SectionKind::AdmissionMedications),
    ("medication on admission", SectionKind::AdmissionMedications),
    ("admission medications", SectionKind::AdmissionMedications),
    ("allergies", SectionKind::Allergies),
    ("physical exam", SectionKind::PhysicalExam),
    ("physical examination", SectionKind::PhysicalExam),
    ("admission physical exam", SectionKind::PhysicalExam),
    ("family history", SectionKind::FamilyHistory),
    ("social history", SectionKind::SocialHistory),
];

// Mixed-case MIMIC headers that end an admission section. Any all-caps
// header of two or more words also counts.
const OTHER_HEADERS: &[&str] = &[
    "name",
    "unit no",
    "admission date",
    "discharge date",
    "date of birth",
    "sex",
    "service",
    "attending",
    "major surgical or invasive procedure",
    "pertinent results",
    "brief hospital course",
    "hospital course",
    "discharge medications",
    "discharge disposition",
    "discharge diagnosis",
    "discharge condition",
    "discharge instructions",
    "discharge physical exam",
    "followup instructions",
    "facility",
];

static HEADER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*([A-Za-z][A-Za-z /&'()\-]{0,60}?)[ \t]*:").unwrap());

fn normalize_header(h: &str) -> String {
    h.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn is_shouted_header(h: &str) -> bool {
    let words = h.split_whitespace().count();
    words >= 2 && h.chars().any(|c| c.is_ascii_alphabetic()) && !h.chars().any(|c| c.is_ascii_lowercase())
}

#[derive(Debug)]
struct Header {
    kind: Option<SectionKind>,
    start: usize,
    body_start: usize,
}

fn find_headers(text: &str) -> Vec<Header> {
    HEADER_RE
        .captures_iter(text)
        .filter_map(|cap| {
            let whole = cap.get(0).unwrap();
            let name = cap.get(1).unwrap().as_str();
            let norm = normalize_header(name);
            let kind = ADMISSION_HEADERS.iter().find(|(h, _)| *h == norm).map(|(_, k)| *k);
            let known_other = OTHER_HEADERS.contains(&norm.as_str());
            (kind.is_some() || known_other || is_shouted_header(name)).then(|| Header {
                kind,
                start: whole.start() + (whole.as_str().len() - whole.as_str().trim_start().len()),
                body_start: whole.end(),
            })
        })
        .collect()
}

fn trimmed_span(text: &str, start: usize, end: usize) -> Option<Span> {
    let slice = &text[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    let span = Span::new(start + lead, end - trail);
    (!span.is_empty()).then_some(span)
}

/// Splits a discharge document into its admission-time sections.
///
/// A section runs from the end of its header to the next recognized header
/// (admission or not) or the end of the document. Only the first section of
/// each kind is kept.
pub fn parse_sections(note_id: &str, raw_text: &str) -> Result<ClinicalNote, ParseError> {
    if raw_text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let headers = find_headers(raw_text);
    let mut sections: Vec<NoteSection> = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        let Some(kind) = h.kind else { continue };
        if sections.iter().any(|s| s.kind == kind) {
            continue;
        }
        let end = headers.get(i + 1).map_or(raw_text.len(), |n| n.start);
        if let Some(span) = trimmed_span(raw_text, h.body_start, end) {
            sections.push(NoteSection { kind, text: raw_text[span.start..span.end].to_string(), char_span: span });
        }
    }
    if sections.is_empty() {
        return Err(ParseError::NoAdmissionSections);
    }
    Ok(ClinicalNote { note_id: note_id.to_string(), sections, source_kind: SourceKind::Raw, raw_text: raw_text.to_string() })
}

/// Rebuilds the note from its admission sections only, one
/// `HEADER: text` block per line, and re-sections the result.
pub fn admission_only(note: &ClinicalNote) -> ClinicalNote {
    let text = note
        .sections
        .iter()
        .map(|s| format!("{}: {}", s.kind.canonical_header(), s.text))
        .collect::<Vec<_>>()
        .join("\n");
    let mut out = parse_sections(&note.note_id, &text).expect("re-rendered sections are recognized");
    out.source_kind = note.source_kind;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    RuleExact,
    RuleFuzzy,
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnparsedMention {
    pub kind_guess: VitalKind,
    pub raw_text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub vitals: VitalSet,
    pub demographics: DemographicProfile,
    pub unparsed_vital_mentions: Vec<UnparsedMention>,
    pub confidence: Confidence,
    /// Disagreements between structured data and the note text.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disagreements: Vec<String>,
}

/// Pluggable vital extractor. The rule-based extractor is the default; an
/// endpoint-backed extractor can implement this for noisy notes.
pub trait VitalExtractor {
    fn extract(&self, note: &ClinicalNote) -> ExtractionReport;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleExtractor;

impl VitalExtractor for RuleExtractor {
    fn extract(&self, note: &ClinicalNote) -> ExtractionReport {
        extract_vitals(note)
    }
}

const NUM: &str = r"(\d{1,3}(?:\.\d+)?)";

struct VitalPattern {
    kind: VitalKind,
    re: Regex,
}

static VITAL_PATTERNS: LazyLock<Vec<VitalPattern>> = LazyLock::new(|| {
    let sep = r"[ \t]*(:|=)?[ \t]*";
    let mk = |kind, labels: &str, value: &str| VitalPattern {
        kind,
        re: Regex::new(&format!(r"\b(?:{labels})\b{sep}{value}")).unwrap(),
    };
    vec![
        mk(VitalKind::Temperature, r"(?i:temperature|temp)|T", NUM),
        mk(VitalKind::BloodPressure, r"(?i:blood[ \t]+pressure)|BP", &format!(r"{NUM}[ \t]*/[ \t]*{NUM}")),
        mk(VitalKind::HeartRate, r"(?i:heart[ \t]+rate|pulse)|HR|P", NUM),
        mk(VitalKind::RespirationRate, r"(?i:respiration[ \t]+rate|respiratory[ \t]+rate|resp)|RR", NUM),
        mk(
            VitalKind::OxygenSaturation,
            r"(?i:oxygen[ \t]+saturation|o2[ \t]*sat(?:uration)?|spo2)",
            &format!(r"{NUM}[ \t]*%?"),
        ),
    ]
});

/// Finds the first labelled mention of a vital kind in `text`, returning
/// the value span, its text, the parsed value and whether the label used a
/// colon or equals sign.
fn first_mention(pattern: &VitalPattern, text: &str) -> Option<(Span, VitalValue, bool)> {
    let cap = pattern.re.captures(text)?;
    let exact = cap.get(1).is_some();
    let first = cap.get(2)?;
    let parse = |m: regex::Match| m.as_str().parse::<f64>().ok();
    match pattern.kind {
        VitalKind::BloodPressure => {
            let second = cap.get(3)?;
            let value = VitalValue::pair(parse(first)?, parse(second)?);
            Some((Span::new(first.start(), second.end()), value, exact))
        }
        _ => Some((Span::new(first.start(), first.end()), VitalValue::Scalar(parse(first)?), exact)),
    }
}

/// Rule-based extraction of the five vitals from the physical exam section.
/// The first mention of each kind wins; mentions that do not form a valid
/// reading are reported as unparsed and the kind stays missing.
pub fn extract_vitals(note: &ClinicalNote) -> ExtractionReport {
    let mut report = ExtractionReport {
        vitals: VitalSet::new(),
        demographics: DemographicProfile::default(),
        unparsed_vital_mentions: Vec::new(),
        confidence: Confidence::RuleExact,
        disagreements: Vec::new(),
    };
    let Some(exam) = note.section(SectionKind::PhysicalExam) else {
        return report;
    };
    let offset = exam.char_span.start;
    let mut all_exact = true;
    for pattern in VITAL_PATTERNS.iter() {
        let Some((span, value, exact)) = first_mention(pattern, &exam.text) else { continue };
        let span = span.shifted(offset);
        match VitalReading::new(pattern.kind, value, Some(span)) {
            Ok(reading) => {
                all_exact &= exact;
                report.vitals.insert(reading);
            }
            Err(_) => report.unparsed_vital_mentions.push(UnparsedMention {
                kind_guess: pattern.kind,
                raw_text: note.raw_text[span.start..span.end].to_string(),
                span,
            }),
        }
    }
    if !all_exact {
        report.confidence = Confidence::RuleFuzzy;
    }
    report
}

/// Scans arbitrary text for vitals, first mention per kind. Used on prompts
/// and template notes, where there is no section structure.
pub fn scan_vitals(text: &str) -> VitalSet {
    let mut set = VitalSet::new();
    for pattern in VITAL_PATTERNS.iter() {
        if let Some((span, value, _)) = first_mention(pattern, text) {
            if let Ok(r) = VitalReading::new(pattern.kind, value, Some(span)) {
                set.insert(r);
            }
        }
    }
    set
}

static GENDER_TOKEN_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(female|male|woman|man)\b").unwrap());
static AGE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(\d{1,3}|_{2,})[ \t]*(?:-|[ \t])?[ \t]*(?:year|yr)s?[ \t]*-?[ \t]*old").unwrap());
static LABELED_AGE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^[ \t]*Age:[ \t]*(\d{1,3})\b").unwrap());
static LABELED_GENDER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*(?:Gender|Sex):[ \t]*(F|M)\b").unwrap());

fn gender_of(token: &str) -> Gender {
    match token.to_ascii_lowercase().as_str() {
        "female" | "woman" => Gender::F,
        _ => Gender::M,
    }
}

/// Gender from the first gendered token of the present illness section.
/// The sentence holding that token must not also name the other gender.
fn infer_gender(text: &str) -> Result<Option<Gender>, ExtractError> {
    let Some(first) = GENDER_TOKEN_RE.find(text) else { return Ok(None) };
    let gender = gender_of(first.as_str());
    let sentence_start = text[..first.start()].rfind(['.', '\n']).map_or(0, |i| i + 1);
    let sentence_end = text[first.end()..].find(['.', '\n']).map_or(text.len(), |i| first.end() + i);
    let conflicting = GENDER_TOKEN_RE
        .find_iter(&text[sentence_start..sentence_end])
        .any(|m| gender_of(m.as_str()) != gender);
    if conflicting {
        Err(ExtractError::GenderAmbiguous)
    } else {
        Ok(Some(gender))
    }
}

fn infer_age(text: &str) -> Option<u8> {
    let cap = AGE_RE.captures(text).or_else(|| LABELED_AGE_RE.captures(text))?;
    let age: u8 = cap.get(1)?.as_str().parse().ok()?;
    (18..=100).contains(&age).then_some(age)
}

/// Demographics for a note. A structured profile, when given, is returned
/// as-is; otherwise age and gender are read from the present illness section
/// (or the whole text for notes without one). Ethnicity is never inferred.
pub fn extract_demographics(
    note: &ClinicalNote,
    structured: Option<&DemographicProfile>,
) -> Result<DemographicProfile, ExtractError> {
    if let Some(p) = structured {
        return Ok(*p);
    }
    let scope = note.section(SectionKind::PresentIllness).map_or(note.raw_text.as_str(), |s| s.text.as_str());
    let gender = match LABELED_GENDER_RE.captures(scope) {
        Some(c) => Some(if &c[1] == "F" { Gender::F } else { Gender::M }),
        None => infer_gender(scope)?,
    };
    Ok(DemographicProfile { age_years: infer_age(scope), gender, ethnicity: None })
}

/// Vitals and demographics for one note, with disagreements between the
/// structured profile and the note text recorded rather than resolved.
pub fn extract(note: &ClinicalNote, structured: Option<&DemographicProfile>) -> Result<ExtractionReport, ExtractError> {
    let mut report = extract_vitals(note);
    report.demographics = extract_demographics(note, structured)?;
    if let Some(p) = structured {
        if let Ok(textual) = extract_demographics(note, None) {
            if let (Some(a), Some(b)) = (p.gender, textual.gender) {
                if a != b {
                    report.disagreements.push(format!("gender: structured {} vs text {}", a.as_str(), b.as_str()));
                }
            }
            if let (Some(a), Some(b)) = (p.age_years, textual.age_years) {
                if a != b {
                    report.disagreements.push(format!("age: structured {a} vs text {b}"));
                }
            }
        }
    }
    Ok(report)
}

static LABELED_ETHNICITY_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*(?:Ethnicity|Race):[ \t]*([^\n]*?)[ \t]*$").unwrap());

/// Best-effort demographics from unstructured text such as a prompt:
/// labelled fields first, then the first age mention and the first
/// gendered token. Ethnicity is only read from a labelled field.
pub fn scan_demographics(text: &str) -> DemographicProfile {
    let gender = match LABELED_GENDER_RE.captures(text) {
        Some(c) => Some(if &c[1] == "F" { Gender::F } else { Gender::M }),
        None => GENDER_TOKEN_RE.find(text).map(|m| gender_of(m.as_str())),
    };
    let ethnicity = LABELED_ETHNICITY_RE.captures(text).and_then(|c| {
        Ethnicity::ALL.into_iter().find(|e| e.surface_forms().iter().any(|f| f.eq_ignore_ascii_case(&c[1])))
    });
    DemographicProfile { age_years: infer_age(text), gender, ethnicity }
}
