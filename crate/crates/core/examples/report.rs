//! End to end: corpus, counterfactuals, mock probing, report tables.
//!
//!     cargo run --example report [beta]

use clinprobe::gateway::{run_probe_batch, BatchOptions, EndpointConfig, Gateway, PromptRegistry};
use clinprobe::metrics::AggregateOptions;
use clinprobe::mock::{gen_corpus, CorpusSpec, MockProfile, MockServer};
use clinprobe::model::{EvalRecord, Variable};
use clinprobe::pipeline::{counterfactuals, gold_map, manifest_pairs, parse_notes, report, CounterfactOptions, NoteInput};
use clinprobe::taxonomy::LosReference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse())?;
    let server = MockServer::start(MockProfile::SeverityOracle { beta }, 0)?;

    let corpus = gen_corpus(&CorpusSpec::new(10, 42))?;
    let inputs: Vec<NoteInput> = corpus
        .iter()
        .map(|c| NoteInput {
            note_id: c.note_id.clone(),
            text: c.text.clone(),
            structured: Some(c.structured),
            gold_los_class: Some(c.gold_los_class),
        })
        .collect();
    let (parsed, _) = parse_notes(&inputs);
    let options = CounterfactOptions {
        variables: vec![Variable::HeartRate, Variable::Temperature, Variable::Gender],
        seed: 42,
        ..Default::default()
    };
    let pairs = manifest_pairs(&counterfactuals(&parsed, &options)?.manifest);

    let config = EndpointConfig { base_url: server.url(), model_tag: format!("oracle-{beta}"), ..Default::default() };
    let gateway = Gateway::new(config, PromptRegistry::default())?;
    let gold = gold_map(&inputs);
    let outcome = run_probe_batch(&gateway, &pairs, &BatchOptions::default(), Some(&gold), &mut |_| {})?;
    let records: Vec<EvalRecord> = outcome.records().cloned().collect();

    let (_, files) = report(&records, &LosReference::default(), &AggregateOptions::default())?;
    println!("{} pairs probed\n", records.len());
    print!("{}", files.summary_csv);
    println!("\n{}", files.demographics_json);
    Ok(())
}
