//! Single-variable counterfactual generation for raw and template notes.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    ClassLabel, ClinicalNote, CounterfactualNote, CounterfactualSpec, DemographicProfile, Ethnicity, SourceKind,
    Variable, VariableValue, VitalSet, VitalValue, Validation,
};
use crate::parser::ExtractionReport;
use crate::taxonomy::{classify_age, severity_shift, vital_classes, AgeClass};

use super::rewrite::{materialize_age, rewrite_demographic, rewrite_vital, GenderMode, RewriteError};
use super::sampling::{derive_seed, sample_class_values_excluding, VALUES_PER_CLASS};
use super::template::render_template;
use super::validate::validate_pair;
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenerateOptions {
    #[serde(default)]
    pub gender_mode: GenderMode,
}

/// Seed for one (note, variable) stream.
pub fn note_variable_seed(corpus_seed: u64, note_id: &str, variable: Variable) -> u64 {
    derive_seed(&[&corpus_seed.to_string(), note_id, variable.as_str()])
}

fn class_seed(rng_seed: u64, class: &str) -> u64 {
    derive_seed(&[&rng_seed.to_string(), class])
}

/// Up to five distinct ages from an age class.
pub fn sample_ages(class: AgeClass, rng_seed: u64, exclude: Option<u8>) -> Vec<u8> {
    let (lo, hi) = class.range();
    let all: Vec<u8> = (lo..=hi).filter(|a| Some(*a) != exclude).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut picks: Vec<u8> =
        index::sample(&mut rng, all.len(), VALUES_PER_CLASS.min(all.len())).into_iter().map(|i| all[i]).collect();
    picks.sort_unstable();
    picks
}

/// The (value, class) edits for one variable, independent of the setting.
pub fn planned_edits(
    variable: Variable,
    original: &VariableValue,
    rng_seed: u64,
) -> Result<Vec<(VariableValue, ClassLabel, Option<u64>)>, EngineError> {
    let mut out = Vec::new();
    match (variable.as_vital(), original) {
        (Some(kind), VariableValue::Vital(orig)) => {
            for class in vital_classes(kind) {
                let seed = class_seed(rng_seed, class.label.display_name());
                for v in sample_class_values_excluding(kind, class.label, seed, Some(orig))? {
                    out.push((VariableValue::Vital(v), ClassLabel::Vital(class.label), Some(seed)));
                }
            }
        }
        (None, VariableValue::Age(age)) => {
            let own = classify_age(*age as i64)?;
            for class in AgeClass::ALL.into_iter().filter(|c| *c != own) {
                let seed = class_seed(rng_seed, class.display_name());
                for a in sample_ages(class, seed, None) {
                    out.push((VariableValue::Age(a), ClassLabel::Age(class), Some(seed)));
                }
            }
        }
        (None, VariableValue::Gender(g)) => {
            out.push((VariableValue::Gender(g.opposite()), ClassLabel::Gender(g.opposite()), None));
        }
        (None, VariableValue::Ethnicity(e)) => {
            for other in Ethnicity::ALL.into_iter().filter(|o| o != e) {
                out.push((VariableValue::Ethnicity(other), ClassLabel::Ethnicity(other), None));
            }
        }
        _ => return Err(EngineError::VariableMissing(variable)),
    }
    Ok(out)
}

fn original_value(extraction: &ExtractionReport, variable: Variable) -> Result<VariableValue, EngineError> {
    match variable.as_vital() {
        Some(kind) => extraction.vitals.get(kind).map(|r| VariableValue::Vital(r.value)),
        None => extraction.demographics.value_of(variable),
    }
    .ok_or(EngineError::VariableMissing(variable))
}

fn spec_for(
    variable: Variable,
    original: &VariableValue,
    value: VariableValue,
    class: ClassLabel,
    seed: u64,
    source_span: Option<crate::model::Span>,
) -> Result<CounterfactualSpec, EngineError> {
    let severity = match (variable.as_vital(), original, &value) {
        (Some(kind), VariableValue::Vital(o), VariableValue::Vital(n)) => Some(severity_shift(kind, o, n)?),
        _ => None,
    };
    Ok(CounterfactualSpec {
        target: variable,
        original_value: *original,
        counterfactual_value: value,
        target_class: class,
        severity,
        rng_seed: seed,
        source_span,
    })
}

fn finish(base_note_id: &str, setting: SourceKind, spec: CounterfactualSpec, base_text: String, text: String) -> CounterfactualNote {
    let validation = validate_pair(&base_text, &text, &spec).validation();
    CounterfactualNote { base_note_id: base_note_id.to_string(), setting, spec, base_text, text, validation }
}

/// Counterfactuals of a raw note for one variable.
///
/// Vitals get up to five values from every class of the kind, the
/// original's own class included and the original value excluded.
/// Demographics get one edit per other class (five ages per age class).
/// Every counterfactual is validated against its base text.
pub fn generate_counterfactuals(
    note: &ClinicalNote,
    extraction: &ExtractionReport,
    target: Variable,
    rng_seed: u64,
    options: &GenerateOptions,
) -> Result<Vec<CounterfactualNote>, EngineError> {
    let original = original_value(extraction, target)?;
    let plan = planned_edits(target, &original, rng_seed)?;
    let mut base_text = note.raw_text.clone();
    let mut source_span = None;
    if let Some(kind) = target.as_vital() {
        source_span = extraction.vitals.get(kind).and_then(|r| r.source_span);
        if source_span.is_none() {
            return Err(EngineError::Rewrite(RewriteError::NoSurfaceForm));
        }
    } else if let (Variable::Age, Some(age)) = (target, extraction.demographics.age_years) {
        base_text = materialize_age(&base_text, age);
    }
    let mut out = Vec::with_capacity(plan.len());
    for (value, class, seed) in plan {
        let spec = spec_for(target, &original, value, class, seed.unwrap_or(rng_seed), source_span)?;
        let text = match (target.as_vital(), &original, &value) {
            (Some(kind), VariableValue::Vital(o), VariableValue::Vital(n)) => {
                rewrite_vital(&base_text, kind, source_span.expect("checked above"), o, n)?
            }
            _ => rewrite_demographic(&base_text, &extraction.demographics, target, &value, options.gender_mode)?,
        };
        out.push(finish(&note.note_id, SourceKind::Raw, spec, base_text.clone(), text));
    }
    Ok(out)
}

fn with_value(profile: &DemographicProfile, vitals: &VitalSet, value: &VariableValue, variable: Variable)
    -> Result<(DemographicProfile, VitalSet), EngineError> {
    let mut p = *profile;
    let mut v = vitals.clone();
    match (variable.as_vital(), value) {
        (Some(kind), VariableValue::Vital(x)) => v = vitals.with_value(kind, *x)?,
        (None, VariableValue::Age(a)) => p.age_years = Some(*a),
        (None, VariableValue::Gender(g)) => p.gender = Some(*g),
        (None, VariableValue::Ethnicity(e)) => p.ethnicity = Some(*e),
        _ => return Err(EngineError::VariableMissing(variable)),
    }
    Ok((p, v))
}

/// Counterfactuals of the template rendering of a note. Uses the same seeds
/// as [`generate_counterfactuals`], so both settings share their values.
pub fn generate_template_counterfactuals(
    note_id: &str,
    profile: &DemographicProfile,
    vitals: &VitalSet,
    target: Variable,
    rng_seed: u64,
) -> Result<Vec<CounterfactualNote>, EngineError> {
    let original = match target.as_vital() {
        Some(kind) => vitals.get(kind).map(|r| VariableValue::Vital(r.value)),
        None => profile.value_of(target),
    }
    .ok_or(EngineError::VariableMissing(target))?;
    let (base_text, placed) = render_template(profile, vitals);
    let source_span = target.as_vital().and_then(|k| placed.get(k)).and_then(|r| r.source_span);
    let mut out = Vec::new();
    for (value, class, seed) in planned_edits(target, &original, rng_seed)? {
        let spec = spec_for(target, &original, value, class, seed.unwrap_or(rng_seed), source_span)?;
        let (p, v) = with_value(profile, vitals, &value, target)?;
        let (text, _) = render_template(&p, &v);
        out.push(finish(note_id, SourceKind::Template, spec, base_text.clone(), text));
    }
    Ok(out)
}

/// Keeps only counterfactuals that passed validation, returning the rest
/// separately for quarantine.
pub fn split_validated(notes: Vec<CounterfactualNote>) -> (Vec<CounterfactualNote>, Vec<CounterfactualNote>) {
    notes.into_iter().partition(|n| n.validation == Validation::Pass)
}

/// Expected number of vital counterfactuals for an original value, by
/// direct enumeration of every class domain.
pub fn expected_vital_count(kind: crate::model::VitalKind, original: &VitalValue) -> usize {
    vital_classes(kind)
        .iter()
        .map(|c| {
            let domain = super::sampling::ClassDomain::new(kind, c.label).expect("table classes are non-empty");
            let n = domain.iter().filter(|v| v != original).count();
            n.min(VALUES_PER_CLASS)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Gender, VitalKind};
    use crate::parser::{extract, parse_sections};
    use crate::taxonomy::{classify_vital, SeverityShift, VitalClassLabel};

    const NOTE: &str = "PRESENT ILLNESS: The patient is a ___ year-old female with a history of NSCLC who presents with shortness of breath. She was admitted.
ALLERGIES: Codeine
PHYSICAL EXAM: On Admission: Vitals: T: 96.9, BP: 118/51, HR: 94 , RR: 18, O2Sat: 94% on 5L with face tent.";

    fn setup(structured: Option<DemographicProfile>) -> (ClinicalNote, ExtractionReport) {
        let note = parse_sections("a1", NOTE).unwrap();
        let report = extract(&note, structured.as_ref()).unwrap();
        (note, report)
    }

    #[test]
    fn heart_rate_includes_120_style_edit() {
        let (note, report) = setup(None);
        let cfs = generate_counterfactuals(&note, &report, Variable::HeartRate, 11, &GenerateOptions::default()).unwrap();
        assert_eq!(cfs.len(), 30);
        assert!(cfs.iter().all(|c| c.validation == Validation::Pass));
        let very_high: Vec<_> = cfs
            .iter()
            .filter(|c| c.spec.target_class == ClassLabel::Vital(VitalClassLabel::VeryHigh))
            .collect();
        assert_eq!(very_high.len(), 5);
        for c in very_high {
            assert_eq!(c.spec.severity, Some(SeverityShift::new(1, 2)));
            let VariableValue::Vital(v) = c.spec.counterfactual_value else { panic!() };
            assert_eq!(c.text, NOTE.replace("HR: 94", &format!("HR: {}", v.render(VitalKind::HeartRate))));
        }
    }

    #[test]
    fn gender_has_one_counterfactual() {
        let (note, report) = setup(None);
        let cfs = generate_counterfactuals(&note, &report, Variable::Gender, 1, &GenerateOptions::default()).unwrap();
        assert_eq!(cfs.len(), 1);
        assert_eq!(cfs[0].spec.counterfactual_value, VariableValue::Gender(Gender::M));
        assert!(cfs[0].text.contains("year-old male") && cfs[0].text.contains("He was admitted"));
        assert_eq!(cfs[0].validation, Validation::Pass);
    }

    #[test]
    fn spo2_count_matches_enumeration() {
        let text = NOTE.replace("O2Sat: 94%", "O2Sat: 96%");
        let note = parse_sections("s", &text).unwrap();
        let report = extract(&note, None).unwrap();
        let cfs = generate_counterfactuals(&note, &report, Variable::OxygenSaturation, 3, &GenerateOptions::default())
            .unwrap();
        // LTL 1-91, VeryLow 92-93, Low 94-95, Normal 96-100 minus the original
        assert_eq!(cfs.len(), 5 + 2 + 2 + 4);
        assert_eq!(cfs.len(), expected_vital_count(VitalKind::OxygenSaturation, &VitalValue::Scalar(96.0)));
    }

    #[test]
    fn missing_variable() {
        let (note, report) = setup(None);
        let err = generate_counterfactuals(&note, &report, Variable::Ethnicity, 1, &GenerateOptions::default());
        assert_eq!(err.unwrap_err(), EngineError::VariableMissing(Variable::Ethnicity));
    }

    #[test]
    fn masked_age_materialized() {
        let structured = DemographicProfile::new(Some(67), Some(Gender::F), Some(Ethnicity::White)).unwrap();
        let (note, report) = setup(Some(structured));
        let cfs = generate_counterfactuals(&note, &report, Variable::Age, 5, &GenerateOptions::default()).unwrap();
        assert_eq!(cfs.len(), 15);
        for c in &cfs {
            assert!(c.base_text.contains("67 year-old female"));
            assert_eq!(c.validation, Validation::Pass, "{:?}", c.validation);
        }
        let err = generate_counterfactuals(&note, &report, Variable::Ethnicity, 5, &GenerateOptions::default());
        assert_eq!(err.unwrap_err(), EngineError::Rewrite(RewriteError::NoSurfaceForm));
    }

    #[test]
    fn template_counterfactuals_share_values() {
        let structured = DemographicProfile::new(Some(67), Some(Gender::F), Some(Ethnicity::White)).unwrap();
        let (note, report) = setup(Some(structured));
        let raw = generate_counterfactuals(&note, &report, Variable::Temperature, 9, &GenerateOptions::default()).unwrap();
        let tpl = generate_template_counterfactuals("a1", &structured, &report.vitals, Variable::Temperature, 9).unwrap();
        assert_eq!(raw.len(), tpl.len());
        for (r, t) in raw.iter().zip(&tpl) {
            assert_eq!(r.spec.counterfactual_value, t.spec.counterfactual_value);
            assert_eq!(t.validation, Validation::Pass);
            let VariableValue::Vital(v) = t.spec.counterfactual_value else { panic!() };
            let ClassLabel::Vital(label) = t.spec.target_class else { panic!() };
            assert_eq!(classify_vital(VitalKind::Temperature, &v).unwrap().0.label, label);
        }
        let eth = generate_template_counterfactuals("a1", &structured, &report.vitals, Variable::Ethnicity, 9).unwrap();
        assert_eq!(eth.len(), 4);
        assert!(eth.iter().all(|c| c.validation == Validation::Pass));
    }
}
