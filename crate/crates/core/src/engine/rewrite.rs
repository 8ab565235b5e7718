//! In-place rewriting of a single variable in note text.

use std::sync::LazyLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DemographicProfile, Ethnicity, Gender, Span, Variable, VariableValue, VitalKind, VitalValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("span {start}..{end} is outside the text")]
    SpanOutOfBounds { start: usize, end: usize },
    #[error("expected {expected} at span, found {found:?}")]
    Mismatch { expected: String, found: String },
    #[error("no surface form")]
    NoSurfaceForm,
    #[error("{0} is not a demographic variable")]
    NotDemographic(Variable),
    #[error("value does not match variable {0}")]
    ValueKind(Variable),
}

/// How much of the text a gender edit may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenderMode {
    /// Only labelled `Gender:` / `Sex:` fields.
    LabelsOnly,
    /// Labelled fields plus gendered nouns, pronouns and titles.
    #[default]
    FullTermMap,
}

static VITAL_TEXT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d+(?:\.\d+)?)(?:([ \t]*/[ \t]*)(\d+(?:\.\d+)?))?$").unwrap());

fn parse_vital_text(kind: VitalKind, text: &str) -> Option<(VitalValue, Option<(String, usize, usize)>)> {
    let cap = VITAL_TEXT_RE.captures(text)?;
    let first: f64 = cap[1].parse().ok()?;
    match (kind, cap.get(3)) {
        (VitalKind::BloodPressure, Some(second)) => {
            let sep = cap.get(2).unwrap();
            Some((
                VitalValue::pair(first, second.as_str().parse().ok()?),
                Some((sep.as_str().to_string(), cap.get(1).unwrap().end(), second.start())),
            ))
        }
        (VitalKind::BloodPressure, None) | (_, Some(_)) => None,
        (_, None) => Some((VitalValue::Scalar(first), None)),
    }
}

/// Numeric value of the text at a vital's span, if it has the kind's shape.
pub fn read_vital_text(kind: VitalKind, text: &str) -> Option<VitalValue> {
    parse_vital_text(kind, text).map(|(v, _)| v)
}

/// Replaces the numeric token(s) at `span` with the rendering of
/// `new_value`. For blood pressure the separator between the components is
/// kept as written.
pub fn rewrite_vital(
    text: &str,
    kind: VitalKind,
    span: Span,
    old_value: &VitalValue,
    new_value: &VitalValue,
) -> Result<String, RewriteError> {
    let found = text
        .get(span.start..span.end)
        .ok_or(RewriteError::SpanOutOfBounds { start: span.start, end: span.end })?;
    let mismatch = || RewriteError::Mismatch { expected: old_value.render(kind), found: found.to_string() };
    let (value, sep) = parse_vital_text(kind, found).ok_or_else(mismatch)?;
    if value != *old_value {
        return Err(mismatch());
    }
    if value == *new_value {
        return Ok(text.to_string());
    }
    let replacement = match (new_value, sep) {
        (VitalValue::Pair { systolic, diastolic }, Some((sep, _, _))) => format!("{systolic:.0}{sep}{diastolic:.0}"),
        _ => new_value.render(kind),
    };
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.push_str(&text[..span.start]);
    out.push_str(&replacement);
    out.push_str(&text[span.end..]);
    Ok(out)
}

static AGE_MENTION_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(\d{1,3}|_{2,})([ \t]*-?[ \t]*(?:year|yr)s?[ \t]*-?[ \t]*old)|(?m)(^[ \t]*Age:[ \t]*)(\d{1,3})\b")
        .unwrap()
});

/// Rewrites every age mention that refers to the patient: `<N> year-old`
/// mentions whose number is the original age or masked, and labelled
/// `Age:` fields.
fn rewrite_age(text: &str, original: Option<u8>, new_age: u8) -> Result<String, RewriteError> {
    let mut touched = false;
    let out = AGE_MENTION_RE.replace_all(text, |c: &Captures| {
        if let Some(num) = c.get(1) {
            let matches_patient = num.as_str().starts_with('_') || num.as_str().parse::<u8>().ok() == original;
            if matches_patient {
                touched = true;
                return format!("{new_age}{}", &c[2]);
            }
            c[0].to_string()
        } else {
            touched = true;
            format!("{}{new_age}", &c[3])
        }
    });
    if touched {
        Ok(out.into_owned())
    } else {
        Err(RewriteError::NoSurfaceForm)
    }
}

/// Fills masked `___ year-old` mentions with the structured age so the
/// baseline and its age counterfactuals differ only in the number.
pub fn materialize_age(text: &str, age: u8) -> String {
    AGE_MENTION_RE
        .replace_all(text, |c: &Captures| match c.get(1) {
            Some(num) if num.as_str().starts_with('_') => format!("{age}{}", &c[2]),
            _ => c[0].to_string(),
        })
        .into_owned()
}

static LABELED_GENDER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^([ \t]*(?:Gender|Sex):[ \t]*)(F|M)\b").unwrap());

static GENDER_TERM_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(female|male|woman|man|women|men|she|he|herself|himself|her|his|him)\b|\b(Ms|Mr)\.").unwrap()
});

// Words after "her" that mark it as an object pronoun rather than a
// possessive determiner.
const FUNCTION_WORDS: &[&str] = &[
    "a", "about", "after", "again", "an", "and", "as", "at", "back", "because", "before", "but", "by", "for",
    "from", "home", "if", "in", "into", "is", "it", "now", "of", "off", "on", "or", "out", "over", "since", "so",
    "than", "that", "the", "then", "this", "to", "today", "up", "was", "were", "when", "which", "while", "who",
    "with", "yesterday",
];

fn match_case(template: &str, word: &str) -> String {
    if template.chars().all(|c| !c.is_ascii_lowercase()) && template.chars().count() > 1 {
        word.to_ascii_uppercase()
    } else if template.starts_with(|c: char| c.is_ascii_uppercase()) {
        let mut chars = word.chars();
        chars.next().map(|f| f.to_ascii_uppercase().to_string() + chars.as_str()).unwrap_or_default()
    } else {
        word.to_string()
    }
}

fn her_is_possessive(rest: &str) -> bool {
    let next = rest.trim_start_matches([' ', '\t']);
    let word: String = next.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '-').collect();
    !word.is_empty() && !FUNCTION_WORDS.contains(&word.to_ascii_lowercase().as_str())
}

/// Maps one gendered term from `from` to the opposite gender, or returns
/// `None` when the term already belongs to the target gender. `rest` is the
/// text after the term, used to disambiguate "her".
pub fn map_gender_term(term: &str, from: Gender, rest: &str) -> Option<String> {
    let lower = term.to_ascii_lowercase();
    let mapped = match (from, lower.as_str()) {
        (Gender::F, "female") => "male",
        (Gender::F, "woman") => "man",
        (Gender::F, "women") => "men",
        (Gender::F, "she") => "he",
        (Gender::F, "herself") => "himself",
        (Gender::F, "her") if her_is_possessive(rest) => "his",
        (Gender::F, "her") => "him",
        (Gender::F, "ms.") => "mr.",
        (Gender::M, "male") => "female",
        (Gender::M, "man") => "woman",
        (Gender::M, "men") => "women",
        (Gender::M, "he") => "she",
        (Gender::M, "himself") => "herself",
        (Gender::M, "his" | "him") => "her",
        (Gender::M, "mr.") => "ms.",
        _ => return None,
    };
    Some(match_case(term, mapped))
}

fn rewrite_gender(text: &str, from: Gender, to: Gender, mode: GenderMode) -> Result<String, RewriteError> {
    let mut touched = false;
    let labelled = LABELED_GENDER_RE.replace_all(text, |c: &Captures| {
        touched = true;
        format!("{}{}", &c[1], to.as_str())
    });
    let labelled = labelled.into_owned();
    if mode == GenderMode::LabelsOnly {
        return if touched { Ok(labelled) } else { Err(RewriteError::NoSurfaceForm) };
    }
    let mut out = String::with_capacity(labelled.len());
    let mut last = 0;
    for m in GENDER_TERM_RE.find_iter(&labelled) {
        if let Some(new) = map_gender_term(m.as_str(), from, &labelled[m.end()..]) {
            out.push_str(&labelled[last..m.start()]);
            out.push_str(&new);
            last = m.end();
            touched = true;
        }
    }
    out.push_str(&labelled[last..]);
    if touched {
        Ok(out)
    } else {
        Err(RewriteError::NoSurfaceForm)
    }
}

static LABELED_ETHNICITY_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^([ \t]*(?:Ethnicity|Race):[ \t]*)([^\n]*?)[ \t]*$").unwrap());

fn ethnicity_mention_re(from: Ethnicity) -> Regex {
    let forms = from.surface_forms().iter().map(|f| regex::escape(f)).collect::<Vec<_>>().join("|");
    Regex::new(&format!(r"\b({forms})([ \t]+(?:female|male|woman|man|patient|gentleman|lady)\b)")).unwrap()
}

fn rewrite_ethnicity(text: &str, from: Ethnicity, to: Ethnicity) -> Result<String, RewriteError> {
    let mut touched = false;
    let labelled = LABELED_ETHNICITY_RE.replace_all(text, |c: &Captures| {
        if from.surface_forms().iter().any(|f| f.eq_ignore_ascii_case(&c[2])) {
            touched = true;
            format!("{}{}", &c[1], to.label())
        } else {
            c[0].to_string()
        }
    });
    let out = ethnicity_mention_re(from)
        .replace_all(&labelled, |c: &Captures| {
            touched = true;
            format!("{}{}", to.surface_forms()[0], &c[2])
        })
        .into_owned();
    if touched {
        Ok(out)
    } else {
        Err(RewriteError::NoSurfaceForm)
    }
}

/// Rewrites one demographic variable of the patient. Fails with
/// [`RewriteError::NoSurfaceForm`] when the text never states the
/// variable, in which case only a template counterfactual can be built.
pub fn rewrite_demographic(
    text: &str,
    profile: &DemographicProfile,
    target: Variable,
    new_value: &VariableValue,
    gender_mode: GenderMode,
) -> Result<String, RewriteError> {
    match (target, new_value) {
        (Variable::Age, VariableValue::Age(a)) => rewrite_age(text, profile.age_years, *a),
        (Variable::Gender, VariableValue::Gender(g)) => {
            let from = profile.gender.unwrap_or(g.opposite());
            if from == *g {
                return Ok(text.to_string());
            }
            rewrite_gender(text, from, *g, gender_mode)
        }
        (Variable::Ethnicity, VariableValue::Ethnicity(e)) => {
            let from = profile.ethnicity.ok_or(RewriteError::NoSurfaceForm)?;
            if from == *e {
                return Ok(text.to_string());
            }
            rewrite_ethnicity(text, from, *e)
        }
        (Variable::Age | Variable::Gender | Variable::Ethnicity, _) => Err(RewriteError::ValueKind(target)),
        _ => Err(RewriteError::NotDemographic(target)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn female() -> DemographicProfile {
        DemographicProfile { age_years: Some(67), gender: Some(Gender::F), ethnicity: Some(Ethnicity::White) }
    }

    #[test]
    fn heart_rate_rewrite() {
        let text = "Vitals: T: 96.9, BP: 118/51, HR: 94 , RR: 18";
        let at = text.find("94 ,").unwrap();
        let out = rewrite_vital(
            text,
            VitalKind::HeartRate,
            Span::new(at, at + 2),
            &VitalValue::Scalar(94.0),
            &VitalValue::Scalar(120.0),
        )
        .unwrap();
        assert_eq!(out, "Vitals: T: 96.9, BP: 118/51, HR: 120 , RR: 18");
    }

    #[test]
    fn identity_rewrite() {
        let text = "HR: 94";
        let out =
            rewrite_vital(text, VitalKind::HeartRate, Span::new(4, 6), &VitalValue::Scalar(94.0), &VitalValue::Scalar(94.0))
                .unwrap();
        assert_eq!(out, text);
    }

    #[test]
    fn blood_pressure_keeps_separator() {
        let out = rewrite_vital(
            "BP: 118/51",
            VitalKind::BloodPressure,
            Span::new(4, 10),
            &VitalValue::pair(118.0, 51.0),
            &VitalValue::pair(185.0, 125.0),
        )
        .unwrap();
        assert_eq!(out, "BP: 185/125");
        let out = rewrite_vital(
            "BP 118 / 51.",
            VitalKind::BloodPressure,
            Span::new(3, 11),
            &VitalValue::pair(118.0, 51.0),
            &VitalValue::pair(100.0, 70.0),
        )
        .unwrap();
        assert_eq!(out, "BP 100 / 70.");
    }

    #[test]
    fn mismatch_is_an_error() {
        let err = rewrite_vital("HR: 95", VitalKind::HeartRate, Span::new(4, 6), &VitalValue::Scalar(94.0), &VitalValue::Scalar(120.0));
        assert!(matches!(err, Err(RewriteError::Mismatch { .. })));
        let err = rewrite_vital("HR", VitalKind::HeartRate, Span::new(4, 6), &VitalValue::Scalar(94.0), &VitalValue::Scalar(120.0));
        assert!(matches!(err, Err(RewriteError::SpanOutOfBounds { .. })));
    }

    #[test]
    fn masked_age() {
        let text = "The patient is a ___ year-old female with NSCLC.";
        assert_eq!(materialize_age(text, 67), "The patient is a 67 year-old female with NSCLC.");
        let out = rewrite_demographic(text, &female(), Variable::Age, &VariableValue::Age(30), GenderMode::default()).unwrap();
        assert_eq!(out, "The patient is a 30 year-old female with NSCLC.");
    }

    #[test]
    fn age_leaves_relatives_alone() {
        let text = "67 year-old female; her 40 year-old son visits.\nAge: 67";
        let out = rewrite_demographic(text, &female(), Variable::Age, &VariableValue::Age(30), GenderMode::default()).unwrap();
        assert_eq!(out, "30 year-old female; her 40 year-old son visits.\nAge: 30");
    }

    #[test]
    fn gender_her_context_rule() {
        let text = "She was admitted; her pain improved and we gave her the dose. Tell her.";
        let out = rewrite_demographic(text, &female(), Variable::Gender, &VariableValue::Gender(Gender::M), GenderMode::default())
            .unwrap();
        assert_eq!(out, "He was admitted; his pain improved and we gave him the dose. Tell him.");
    }

    #[test]
    fn gender_round_trip_without_her() {
        let text = "Ms. Doe is a 67 year-old woman. She reports herself well.\nGender: F";
        let male = DemographicProfile { gender: Some(Gender::M), ..female() };
        let m = rewrite_demographic(text, &female(), Variable::Gender, &VariableValue::Gender(Gender::M), GenderMode::default())
            .unwrap();
        assert_eq!(m, "Mr. Doe is a 67 year-old man. He reports himself well.\nGender: M");
        let back =
            rewrite_demographic(&m, &male, Variable::Gender, &VariableValue::Gender(Gender::F), GenderMode::default()).unwrap();
        assert_eq!(back, text);
    }

    #[test]
    fn gender_labels_only() {
        let text = "Gender: F\nShe is well.";
        let out = rewrite_demographic(text, &female(), Variable::Gender, &VariableValue::Gender(Gender::M), GenderMode::LabelsOnly)
            .unwrap();
        assert_eq!(out, "Gender: M\nShe is well.");
        let err = rewrite_demographic("She is well.", &female(), Variable::Gender, &VariableValue::Gender(Gender::M), GenderMode::LabelsOnly);
        assert_eq!(err, Err(RewriteError::NoSurfaceForm));
    }

    #[test]
    fn words_containing_terms_are_untouched() {
        let text = "female with shell shock; the manager helped her.";
        let out = rewrite_demographic(text, &female(), Variable::Gender, &VariableValue::Gender(Gender::M), GenderMode::default())
            .unwrap();
        assert_eq!(out, "male with shell shock; the manager helped him.");
    }

    #[test]
    fn ethnicity_needs_a_mention() {
        let err = rewrite_demographic(
            "67 year-old female with dyspnea.",
            &female(),
            Variable::Ethnicity,
            &VariableValue::Ethnicity(Ethnicity::Black),
            GenderMode::default(),
        );
        assert_eq!(err, Err(RewriteError::NoSurfaceForm));
        let out = rewrite_demographic(
            "Ethnicity: White\nA White female with dyspnea. White count normal.",
            &female(),
            Variable::Ethnicity,
            &VariableValue::Ethnicity(Ethnicity::AsianPacific),
            GenderMode::default(),
        )
        .unwrap();
        assert_eq!(out, "Ethnicity: Asian & Pacific\nA Asian & Pacific female with dyspnea. White count normal.");
    }
}
