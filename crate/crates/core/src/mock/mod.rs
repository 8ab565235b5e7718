//! Reference inference server and synthetic corpus generator, so the
//! pipeline can run end to end without patient data or a real model.

pub mod corpus;
pub mod profile;
pub mod server;

use thiserror::Error;

pub use corpus::{gen_corpus, CorpusNote, CorpusSpec, VitalDist};
pub use profile::{
    bracketing_mixture, offset_keys, oracle_expected_los, oracle_score, MockHandler, MockProfile, MockReply, ScriptStep,
};
pub use server::MockServer;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MockError {
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("invalid corpus spec: {0}")]
    Corpus(String),
    #[error("cannot bind: {0}")]
    Bind(String),
}
