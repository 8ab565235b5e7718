//! Sections an admission note and lists what the rule extractor finds.
//!
//!     cargo run --example parse_note

use clinprobe::parser::{admission_only, extract, parse_sections};
use clinprobe::taxonomy::classify_vital;

const NOTE: &str = "Name: ___  Unit No: ___
Sex: F

CHIEF COMPLAINT: Shortness of breath

PRESENT ILLNESS: The patient is a 67 year-old female with a history of NSCLC who presents with shortness of breath.

PHYSICAL EXAM: On Admission: Vitals: T: 96.9, BP: 118/51, HR: 94 , RR: 18, O2Sat: 94% on 5L with face tent.

DISCHARGE DIAGNOSIS: pneumonia
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let note = admission_only(&parse_sections("demo", NOTE)?);
    for s in &note.sections {
        println!("[{:?}] {} chars", s.kind, s.text.len());
    }
    let report = extract(&note, None)?;
    println!("confidence: {:?}", report.confidence);
    for r in report.vitals.iter() {
        let (class, severity) = classify_vital(r.kind, &r.value)?;
        println!("{:<18} {:>8}  {:<10} severity {severity:+}", r.kind.display_name(), r.value.render(r.kind), class.label.display_name());
    }
    println!("severity sum {}", report.vitals.severity_sum());
    let d = &report.demographics;
    println!("age {:?}, gender {:?}, ethnicity {:?}", d.age_years, d.gender, d.ethnicity);
    Ok(())
}
