//! Generates raw and template counterfactuals for one synthetic note.
//!
//!     cargo run --example counterfactuals

use clinprobe::mock::{gen_corpus, CorpusSpec};
use clinprobe::model::{SourceKind, Variable, VariableValue};
use clinprobe::pipeline::{counterfactuals, parse_notes, CounterfactOptions, NoteInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = gen_corpus(&CorpusSpec::new(3, 21))?;
    let inputs: Vec<NoteInput> = corpus
        .iter()
        .map(|c| NoteInput { note_id: c.note_id.clone(), text: c.text.clone(), structured: Some(c.structured), gold_los_class: None })
        .collect();
    let (parsed, _) = parse_notes(&inputs);

    let options = CounterfactOptions {
        variables: vec![Variable::HeartRate, Variable::Gender, Variable::Ethnicity],
        seed: 21,
        ..Default::default()
    };
    let out = counterfactuals(&parsed, &options)?;
    for line in out.summary_lines() {
        println!("{line}");
    }

    println!();
    for e in out.manifest.iter().filter(|e| e.note.base_note_id == "n0001" && e.note.setting == SourceKind::Raw).take(6) {
        let spec = &e.note.spec;
        let value = |v: &VariableValue| match v {
            VariableValue::Vital(x) => x.render(spec.target.as_vital().unwrap()),
            other => format!("{other:?}"),
        };
        let shift = spec.severity.map_or(String::new(), |s| format!(" shift {:+}", s.shift_raw));
        println!("{:<12} {} -> {} ({}){shift}", spec.target.as_str(), value(&spec.original_value), value(&spec.counterfactual_value), spec.target_class.display_name());
    }
    Ok(())
}
