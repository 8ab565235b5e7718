//! Probes counterfactual pairs against the reference mock server, which
//! answers like a model whose expected stay tracks vital severity.
//!
//!     cargo run --example mock_eval

use clinprobe::gateway::{run_probe_batch, BatchOptions, EndpointConfig, Gateway, PromptRegistry};
use clinprobe::metrics::{delta_e, jsd};
use clinprobe::mock::{gen_corpus, CorpusSpec, MockProfile, MockServer};
use clinprobe::model::{SourceKind, Variable};
use clinprobe::pipeline::{counterfactuals, manifest_pairs, parse_notes, CounterfactOptions, NoteInput};
use clinprobe::taxonomy::LosReference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = MockServer::start(MockProfile::SeverityOracle { beta: 1.0 }, 0)?;
    println!("mock at {}", server.url());

    let corpus = gen_corpus(&CorpusSpec::normal_baseline(2, 3))?;
    let inputs: Vec<NoteInput> = corpus
        .iter()
        .map(|c| NoteInput { note_id: c.note_id.clone(), text: c.text.clone(), structured: Some(c.structured), gold_los_class: None })
        .collect();
    let (parsed, _) = parse_notes(&inputs);
    let options = CounterfactOptions {
        variables: vec![Variable::OxygenSaturation],
        seed: 3,
        settings: vec![SourceKind::Raw],
        ..Default::default()
    };
    let pairs = manifest_pairs(&counterfactuals(&parsed, &options)?.manifest);

    let config = EndpointConfig { base_url: server.url(), max_in_flight: 4, model_tag: "oracle".into(), ..Default::default() };
    let gateway = Gateway::new(config, PromptRegistry::default())?;
    let outcome = run_probe_batch(&gateway, &pairs, &BatchOptions::default(), None, &mut |_| {})?;

    let reference = LosReference::default();
    for r in outcome.records() {
        let (o, c) = (r.orig_dist.unwrap(), r.cf_dist.unwrap());
        let shift = r.spec.severity.unwrap().shift_raw;
        println!("{} shift {shift:+}  dE {:+.2}  JSD {:.3}", r.base_note_id, delta_e(&o, &c, &reference), jsd(&o, &c));
    }
    println!("{:?}", outcome.stats);
    Ok(())
}
