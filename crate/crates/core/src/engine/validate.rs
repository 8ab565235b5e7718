//! Diff-based check that a counterfactual changes only its target.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, Algorithm, DiffTag};

use crate::model::{CounterfactualSpec, Span, Variable, VariableValue, Validation};
use crate::parser::scan_vitals;

use super::rewrite::{map_gender_term, read_vital_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Pass,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub orig_span: Span,
    pub new_span: Span,
    pub orig_text: String,
    pub new_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub status: ValidationStatus,
    pub diff_hunks: Vec<Hunk>,
    pub offending_hunks: Vec<Hunk>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ValidationReport {
    pub fn validation(&self) -> Validation {
        match (&self.status, &self.reason) {
            (ValidationStatus::Pass, _) => Validation::Pass,
            (ValidationStatus::Flagged, Some(r)) => Validation::Flagged(r.clone()),
            (ValidationStatus::Flagged, None) => Validation::Flagged("flagged".into()),
        }
    }
}

static TOKEN_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?|[A-Za-z]+|\s+|[^\sA-Za-z0-9]").unwrap());

/// Splits text into number, word, whitespace and single-symbol tokens.
/// Non-ASCII letters fall into the symbol class one character at a time.
pub fn tokenize(text: &str) -> Vec<&str> {
    TOKEN_RE.find_iter(text).map(|m| m.as_str()).collect()
}

fn offsets(tokens: &[&str], base: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(tokens.len() + 1);
    let mut at = base;
    out.push(at);
    for t in tokens {
        at += t.len();
        out.push(at);
    }
    out
}

fn token_hunks(orig: &str, new: &str, orig_base: usize, new_base: usize, out: &mut Vec<(Span, Span)>) {
    let a = tokenize(orig);
    let b = tokenize(new);
    let ao = offsets(&a, orig_base);
    let bo = offsets(&b, new_base);
    for op in capture_diff_slices(Algorithm::Myers, &a, &b) {
        let (tag, ar, br) = op.as_tag_tuple();
        if tag == DiffTag::Equal {
            continue;
        }
        let span_a = Span::new(ao[ar.start], ao[ar.end]);
        let span_b = Span::new(bo[br.start], bo[br.end]);
        // adjacent delete + insert from the same op family form one hunk
        if let Some(last) = out.last_mut() {
            if last.0.end == span_a.start && last.1.end == span_b.start {
                last.0.end = span_a.end;
                last.1.end = span_b.end;
                continue;
            }
        }
        out.push((span_a, span_b));
    }
}

fn line_offsets(lines: &[&str]) -> Vec<usize> {
    offsets(lines, 0)
}

/// Line diff refined to tokens inside changed line blocks. Hunks separated
/// only by a run of punctuation without whitespace (the "/" of a blood
/// pressure) are merged.
pub fn diff_hunks(original: &str, counterfactual: &str) -> Vec<Hunk> {
    let a: Vec<&str> = original.split_inclusive('\n').collect();
    let b: Vec<&str> = counterfactual.split_inclusive('\n').collect();
    let ao = line_offsets(&a);
    let bo = line_offsets(&b);
    let mut spans: Vec<(Span, Span)> = Vec::new();
    for op in capture_diff_slices(Algorithm::Myers, &a, &b) {
        let (tag, ar, br) = op.as_tag_tuple();
        if tag == DiffTag::Equal {
            continue;
        }
        let (oa, ob) = (ao[ar.start], bo[br.start]);
        token_hunks(&original[oa..ao[ar.end]], &counterfactual[ob..bo[br.end]], oa, ob, &mut spans);
    }
    let mut merged: Vec<(Span, Span)> = Vec::new();
    for (sa, sb) in spans {
        if let Some(last) = merged.last_mut() {
            let gap = &original[last.0.end..sa.start];
            let gap_new = &counterfactual[last.1.end..sb.start];
            let punct = |g: &str| !g.is_empty() && g.chars().all(|c| !c.is_alphanumeric() && !c.is_whitespace());
            if gap == gap_new && punct(gap) {
                last.0.end = sa.end;
                last.1.end = sb.end;
                continue;
            }
        }
        merged.push((sa, sb));
    }
    merged
        .into_iter()
        .map(|(sa, sb)| Hunk {
            orig_span: sa,
            new_span: sb,
            orig_text: original[sa.start..sa.end].to_string(),
            new_text: counterfactual[sb.start..sb.end].to_string(),
        })
        .collect()
}

fn vital_region(original: &str, spec: &CounterfactualSpec) -> Option<Span> {
    let kind = spec.target.as_vital()?;
    spec.source_span.or_else(|| scan_vitals(original).get(kind).and_then(|r| r.source_span))
}

/// Hunks inside a vital's region are intended when splicing all of them
/// into the region yields exactly the counterfactual value.
fn vital_hunks_intended(original: &str, spec: &CounterfactualSpec, hunks: &[&Hunk]) -> bool {
    let (Some(kind), Some(region), VariableValue::Vital(new_value)) =
        (spec.target.as_vital(), vital_region(original, spec), &spec.counterfactual_value)
    else {
        return false;
    };
    if hunks.is_empty() || hunks.iter().any(|h| !region.contains(&h.orig_span)) {
        return false;
    }
    let mut text = String::new();
    let mut at = region.start;
    for h in hunks {
        text.push_str(&original[at..h.orig_span.start]);
        text.push_str(&h.new_text);
        at = h.orig_span.end;
    }
    text.push_str(&original[at..region.end]);
    let rendered = read_vital_text(kind, &text);
    rendered.as_ref() == Some(new_value) && text.trim() == text
}

fn word_pairs_are_gender_map(orig: &str, new: &str, spec: &CounterfactualSpec, rest: &str) -> bool {
    let VariableValue::Gender(from) = spec.original_value else { return false };
    let a = tokenize(orig);
    let b = tokenize(new);
    if a.len() != b.len() {
        return false;
    }
    let mut changed = false;
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        if x == y {
            continue;
        }
        changed = true;
        let follow = a[i + 1..].concat() + rest;
        let label_swap = *x == from.as_str() && *y == from.opposite().as_str();
        // titles keep their period as a separate token
        let title = follow.starts_with('.')
            && map_gender_term(&format!("{x}."), from, &follow[1..]).as_deref() == Some(&format!("{y}.")[..]);
        // "her" may map to either the object or the possessive form
        let her = from == crate::model::Gender::F
            && x.eq_ignore_ascii_case("her")
            && ["his", "him"].contains(&y.to_ascii_lowercase().as_str());
        if !(label_swap || title || her || map_gender_term(x, from, &follow).as_deref() == Some(*y)) {
            return false;
        }
    }
    changed
}

fn hunk_is_intended(original: &str, spec: &CounterfactualSpec, h: &Hunk) -> bool {
    match (&spec.target, &spec.original_value, &spec.counterfactual_value) {
        (Variable::Age, orig, VariableValue::Age(new)) => {
            let was = h.orig_text.chars().all(|c| c == '_')
                || matches!(orig, VariableValue::Age(a) if h.orig_text == a.to_string());
            was && h.new_text == new.to_string()
        }
        (Variable::Gender, _, _) => word_pairs_are_gender_map(&h.orig_text, &h.new_text, spec, &original[h.orig_span.end..]),
        (Variable::Ethnicity, VariableValue::Ethnicity(from), VariableValue::Ethnicity(to)) => {
            let is = |e: &crate::model::Ethnicity, t: &str| e.surface_forms().iter().any(|f| f.eq_ignore_ascii_case(t));
            is(from, h.orig_text.trim()) && is(to, h.new_text.trim())
        }
        _ => false,
    }
}

/// Classifies every hunk of the (original, counterfactual) diff as intended
/// or offending. The pair passes when nothing is offending and at least one
/// hunk realizes the edit.
pub fn validate_pair(original: &str, counterfactual: &str, spec: &CounterfactualSpec) -> ValidationReport {
    let hunks = diff_hunks(original, counterfactual);
    let mut intended = vec![false; hunks.len()];
    if spec.target.as_vital().is_some() {
        if let Some(region) = vital_region(original, spec) {
            let inside: Vec<usize> = (0..hunks.len()).filter(|&i| region.contains(&hunks[i].orig_span)).collect();
            let refs: Vec<&Hunk> = inside.iter().map(|&i| &hunks[i]).collect();
            if vital_hunks_intended(original, spec, &refs) {
                inside.iter().for_each(|&i| intended[i] = true);
            }
        }
    } else {
        for (i, h) in hunks.iter().enumerate() {
            intended[i] = hunk_is_intended(original, spec, h);
        }
    }
    let offending: Vec<Hunk> = hunks.iter().zip(&intended).filter(|(_, ok)| !**ok).map(|(h, _)| h.clone()).collect();
    let reason = if hunks.is_empty() || !intended.iter().any(|x| *x) {
        Some("no intended change".to_string())
    } else if let Some(first) = offending.first() {
        Some(format!(
            "{} off-target edit(s), first at bytes {}..{}: {:?} -> {:?}",
            offending.len(),
            first.orig_span.start,
            first.orig_span.end,
            first.orig_text,
            first.new_text
        ))
    } else {
        None
    };
    let status = if reason.is_none() { ValidationStatus::Pass } else { ValidationStatus::Flagged };
    ValidationReport { status, diff_hunks: hunks, offending_hunks: offending, reason }
}

/// Undoes hunks on the counterfactual text, restoring the original bytes
/// they replaced.
pub fn revert_hunks(counterfactual: &str, hunks: &[Hunk]) -> String {
    let mut out = String::with_capacity(counterfactual.len());
    let mut at = 0;
    for h in hunks {
        out.push_str(&counterfactual[at..h.new_span.start]);
        out.push_str(&h.orig_text);
        at = h.new_span.end;
    }
    out.push_str(&counterfactual[at..]);
    out
}
