//! Noise-free template notes holding only demographics and vitals.

use crate::model::{
    ClinicalNote, DemographicProfile, NoteSection, SectionKind, SourceKind, Span, VitalKind, VitalReading, VitalSet,
};

/// Vital lines in template order, with their labels.
pub const TEMPLATE_VITALS: [(VitalKind, &str); 5] = [
    (VitalKind::HeartRate, "Heart Rate"),
    (VitalKind::BloodPressure, "Blood Pressure"),
    (VitalKind::RespirationRate, "Respiration Rate"),
    (VitalKind::Temperature, "Temperature"),
    (VitalKind::OxygenSaturation, "Oxygen Saturation"),
];

/// Renders the template layout:
///
/// ```text
/// Age: 67
/// Gender: F
/// Ethnicity: White
/// Vitals:
///   Heart Rate: 94
///   Blood Pressure: 118/51
///   Respiration Rate: 18
///   Temperature: 96.9
///   Oxygen Saturation: 94%
/// ```
///
/// Lines are joined with `\n` and there is no trailing newline. Absent
/// values drop their line. The returned vitals carry spans into the
/// template text.
pub fn render_template(profile: &DemographicProfile, vitals: &VitalSet) -> (String, VitalSet) {
    let mut text = String::new();
    if let Some(age) = profile.age_years {
        text.push_str(&format!("Age: {age}\n"));
    }
    if let Some(g) = profile.gender {
        text.push_str(&format!("Gender: {}\n", g.as_str()));
    }
    if let Some(e) = profile.ethnicity {
        text.push_str(&format!("Ethnicity: {}\n", e.label()));
    }
    text.push_str("Vitals:");
    let mut placed = VitalSet::new();
    for (kind, label) in TEMPLATE_VITALS {
        let Some(r) = vitals.get(kind) else { continue };
        text.push_str(&format!("\n  {label}: "));
        let start = text.len();
        text.push_str(&r.value.render(kind));
        let span = Span::new(start, text.len());
        if kind == VitalKind::OxygenSaturation {
            text.push('%');
        }
        placed.insert(VitalReading { source_span: Some(span), ..*r });
    }
    (text, placed)
}

/// Template note for a profile and vital set. The whole text forms one
/// physical-exam section so vitals extraction works unchanged.
pub fn synthesize_template(note_id: &str, profile: &DemographicProfile, vitals: &VitalSet) -> ClinicalNote {
    let (text, _) = render_template(profile, vitals);
    let section = NoteSection { kind: SectionKind::PhysicalExam, text: text.clone(), char_span: Span::new(0, text.len()) };
    ClinicalNote { note_id: note_id.to_string(), sections: vec![section], source_kind: SourceKind::Template, raw_text: text }
}
