//! Generates a synthetic corpus and prints its first note with the values
//! planted in it.
//!
//!     cargo run --example corpus [n] [seed]

use clinprobe::mock::{gen_corpus, CorpusSpec};
use clinprobe::model::Gender;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map_or(Ok(200), |s| s.parse())?;
    let seed = args.next().map_or(Ok(1), |s| s.parse())?;
    let corpus = gen_corpus(&CorpusSpec::new(n, seed))?;

    let first = &corpus[0];
    println!("{}\n", first.text);
    println!("gold LOS class {}, severity sum {}", first.gold_los_class, first.planted.severity_sum());

    let male = corpus.iter().filter(|c| c.structured.gender == Some(Gender::M)).count();
    let mut classes = [0usize; 4];
    for c in &corpus {
        classes[c.gold_los_class as usize - 1] += 1;
    }
    println!("{n} notes, {male} male, gold classes {classes:?}");
    Ok(())
}
