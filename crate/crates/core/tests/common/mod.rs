#![allow(dead_code)]

use std::collections::HashMap;

use clinprobe::gateway::{run_probe_batch, BatchOptions, BatchOutcome, EndpointConfig, Gateway, ProbeSet, PromptRegistry};
use clinprobe::mock::{gen_corpus, CorpusNote, CorpusSpec, MockProfile, MockServer};
use clinprobe::model::{EvalRecord, Variable};
use clinprobe::pipeline::{
    counterfactuals, gold_map, manifest_pairs, parse_notes, CounterfactOptions, CounterfactOutput, NoteInput,
    ParsedNote,
};

pub fn inputs(corpus: &[CorpusNote]) -> Vec<NoteInput> {
    corpus
        .iter()
        .map(|c| NoteInput {
            note_id: c.note_id.clone(),
            text: c.text.clone(),
            structured: Some(c.structured),
            gold_los_class: Some(c.gold_los_class),
        })
        .collect()
}

pub struct Prepared {
    pub corpus: Vec<CorpusNote>,
    pub inputs: Vec<NoteInput>,
    pub parsed: Vec<ParsedNote>,
    pub output: CounterfactOutput,
}

pub fn prepare(spec: &CorpusSpec, variables: &[Variable], seed: u64) -> Prepared {
    let corpus = gen_corpus(spec).unwrap();
    let inputs = inputs(&corpus);
    let (parsed, failed) = parse_notes(&inputs);
    assert!(failed.is_empty(), "{failed:?}");
    let options = CounterfactOptions { variables: variables.to_vec(), seed, ..Default::default() };
    let output = counterfactuals(&parsed, &options).unwrap();
    Prepared { corpus, inputs, parsed, output }
}

impl Prepared {
    pub fn gold(&self) -> HashMap<String, u8> {
        gold_map(&self.inputs)
    }

    /// Probes every manifest pair against a fresh mock server.
    pub fn probe(&self, profile: MockProfile, probes: ProbeSet, concurrency: usize) -> BatchOutcome {
        let server = MockServer::start(profile, 0).unwrap();
        let config = EndpointConfig { base_url: server.url(), max_in_flight: concurrency, model_tag: "mock".into(), ..Default::default() };
        let gateway = Gateway::new(config, PromptRegistry::default()).unwrap();
        let options = BatchOptions { probes, ..Default::default() };
        let pairs = manifest_pairs(&self.output.manifest);
        run_probe_batch(&gateway, &pairs, &options, Some(&self.gold()), &mut |_| {}).unwrap()
    }
}

pub fn records(outcome: &BatchOutcome) -> Vec<EvalRecord> {
    assert_eq!(outcome.failures().count(), 0);
    outcome.records().cloned().collect()
}

pub fn vital_variables() -> Vec<Variable> {
    Variable::ALL.into_iter().filter(|v| v.as_vital().is_some()).collect()
}
