//! Distribution-level comparisons between an original and a counterfactual
//! prediction.

use crate::model::LosDistribution;
use crate::taxonomy::LosReference;

fn kl_base2(p: &[f64; 4], m: &[f64; 4]) -> f64 {
    p.iter().zip(m).filter(|(pi, _)| **pi > 0.0).map(|(pi, mi)| pi * (pi / mi).log2()).sum()
}

/// Jensen-Shannon divergence in bits, so the result lies in [0, 1].
pub fn jsd(p: &LosDistribution, q: &LosDistribution) -> f64 {
    let (p, q) = (p.probs(), q.probs());
    let m: [f64; 4] = std::array::from_fn(|i| 0.5 * (p[i] + q[i]));
    let d = 0.5 * kl_base2(&p, &m) + 0.5 * kl_base2(&q, &m);
    // rounding can leave a hair below zero or above one
    d.clamp(0.0, 1.0)
}

/// Expected length of stay in days under the reference-day mapping.
pub fn expected_los(p: &LosDistribution, reference: &LosReference) -> f64 {
    p.probs().iter().zip(reference.days()).map(|(pi, d)| pi * d).sum()
}

pub fn delta_e(orig: &LosDistribution, cf: &LosDistribution, reference: &LosReference) -> f64 {
    expected_los(cf, reference) - expected_los(orig, reference)
}

/// True when the most probable class changes. Ties resolve to the lowest
/// class on both sides.
pub fn is_flip(orig: &LosDistribution, cf: &LosDistribution) -> bool {
    orig.argmax() != cf.argmax()
}
