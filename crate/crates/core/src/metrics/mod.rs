//! Behavioral metrics, statistical tests and report aggregation.

pub mod aggregate;
pub mod behavior;
pub mod classification;
pub mod divergence;
pub mod stats;

use thiserror::Error;

use crate::model::ModelError;

pub use aggregate::{aggregate, AggregateOptions, AggregateReport, Grouping};
pub use behavior::{
    corr_dir, delta_loglik_stats, monotonicity_pct, pair_metrics, positive_shift_stats, Direction, MonoRule,
    PairMetrics,
};
pub use classification::{classification_scores, ClassificationScores};
pub use divergence::{delta_e, expected_los, is_flip, jsd};
pub use stats::{one_sample_ttest, paired_ttest, TTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("insufficient bins")]
    InsufficientBins,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown LOS class {0}")]
    UnknownClass(u8),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("unknown grouping {0:?}")]
    UnknownGrouping(String),
    #[error("write failed: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
