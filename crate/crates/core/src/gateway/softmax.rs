//! Label log-scores to an LOS distribution.

use std::collections::BTreeMap;

use crate::model::LosDistribution;

use super::GatewayError;

pub const LOS_LABELS: [&str; 4] = ["1", "2", "3", "4"];

/// Softmax over the four label log-scores. A `None` score marks an excluded
/// label (probability zero) and the rest are renormalized.
pub fn label_softmax(scores: &BTreeMap<String, Option<f64>>) -> Result<LosDistribution, GatewayError> {
    let mut xs = [None; 4];
    for (i, label) in LOS_LABELS.iter().enumerate() {
        let v = scores.get(*label).ok_or_else(|| GatewayError::Payload(format!("missing score for label {label}")))?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(GatewayError::Payload(format!("non-finite score for label {label}")));
            }
        }
        xs[i] = *v;
    }
    let max = xs.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(GatewayError::Degenerate);
    }
    let w: [f64; 4] = std::array::from_fn(|i| xs[i].map_or(0.0, |x| (x - max).exp()));
    let total: f64 = w.iter().sum();
    LosDistribution::new(w.map(|x| x / total)).map_err(|e| GatewayError::Payload(e.to_string()))
}
