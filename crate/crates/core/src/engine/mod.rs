//! Counterfactual generation: value sampling, text rewriting, template
//! synthesis and diff validation.

pub mod generate;
pub mod rewrite;
pub mod sampling;
pub mod template;
pub mod validate;

use thiserror::Error;

use crate::model::{ModelError, Variable, VitalKind};
use crate::taxonomy::{TaxonomyError, VitalClassLabel};

pub use generate::{
    expected_vital_count, generate_counterfactuals, generate_template_counterfactuals, note_variable_seed,
    split_validated, GenerateOptions,
};
pub use rewrite::{rewrite_demographic, rewrite_vital, GenderMode, RewriteError};
pub use sampling::{derive_seed, sample_class_values};
pub use template::synthesize_template;
pub use validate::{validate_pair, Hunk, ValidationReport, ValidationStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("variable missing in note: {0}")]
    VariableMissing(Variable),
    #[error("empty range for {kind} class {label:?}")]
    EmptyRange { kind: VitalKind, label: VitalClassLabel },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
