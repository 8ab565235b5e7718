//! Renders the template version of a parsed note.
//!
//!     cargo run --example templates

use clinprobe::mock::{gen_corpus, CorpusSpec};
use clinprobe::pipeline::{parse_notes, template_notes, NoteInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let note = gen_corpus(&CorpusSpec::new(1, 5))?.remove(0);
    let input = NoteInput { note_id: note.note_id, text: note.text, structured: Some(note.structured), gold_los_class: None };
    let (parsed, _) = parse_notes(&[input]);
    for t in template_notes(&parsed) {
        println!("{}", t.note.raw_text);
        println!("-- {} vitals, structured {:?}", t.vitals.len(), t.structured);
    }
    Ok(())
}
