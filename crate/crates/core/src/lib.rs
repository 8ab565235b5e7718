//! Counterfactual behavioral testing of language models on clinical
//! admission notes.
//!
//! The pipeline runs in stages: section a note and extract its variables
//! ([`parser`]), rewrite one variable at a time and validate the edit
//! ([`engine`]), probe a model endpoint with both versions ([`gateway`]),
//! then summarize sensitivity, direction and bias ([`metrics`]). The
//! [`mock`] module provides a reference server and a synthetic corpus so
//! the whole pipeline can run without restricted data.

pub mod cli;
pub mod engine;
pub mod gateway;
pub mod metrics;
pub mod mock;
pub mod model;
pub mod parser;
pub mod pipeline;
pub mod taxonomy;
