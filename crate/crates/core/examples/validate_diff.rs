//! Shows the diff check that guards every counterfactual: a clean edit
//! passes, a stray second edit is flagged.
//!
//!     cargo run --example validate_diff

use clinprobe::engine::validate_pair;
use clinprobe::mock::{gen_corpus, CorpusSpec};
use clinprobe::model::Variable;
use clinprobe::pipeline::{counterfactuals, parse_notes, CounterfactOptions, NoteInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let note = gen_corpus(&CorpusSpec::normal_baseline(1, 8))?.remove(0);
    let input = NoteInput { note_id: note.note_id, text: note.text, structured: Some(note.structured), gold_los_class: None };
    let (parsed, _) = parse_notes(&[input]);
    let options = CounterfactOptions { variables: vec![Variable::RespirationRate], seed: 8, ..Default::default() };
    let entry = counterfactuals(&parsed, &options)?.manifest.remove(0);
    let cf = &entry.note;

    let clean = validate_pair(&cf.base_text, &cf.text, &cf.spec);
    println!("clean edit: {:?}", clean.status);
    for h in &clean.diff_hunks {
        println!("  {:?} -> {:?} at {}..{}", h.orig_text, h.new_text, h.orig_span.start, h.orig_span.end);
    }

    let tampered = cf.text.replacen("PRESENT ILLNESS", "HISTORY", 1);
    let bad = validate_pair(&cf.base_text, &tampered, &cf.spec);
    println!("tampered: {:?} ({})", bad.status, bad.reason.as_deref().unwrap_or(""));
    for h in &bad.offending_hunks {
        println!("  offending {:?} -> {:?}", h.orig_text, h.new_text);
    }
    Ok(())
}
