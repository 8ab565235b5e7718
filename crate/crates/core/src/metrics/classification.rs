//! Accuracy and macro F1 over the four LOS classes.

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: [f64; 4],
}

/// Exact-match accuracy and the unweighted mean of per-class F1 over all
/// four classes. A class with no true positives scores F1 = 0, including a
/// class absent from both sides.
pub fn classification_scores(predicted: &[u8], gold: &[u8]) -> Result<ClassificationScores, MetricError> {
    if predicted.len() != gold.len() {
        return Err(MetricError::LengthMismatch(predicted.len(), gold.len()));
    }
    if predicted.is_empty() {
        return Err(MetricError::TooFewSamples(0));
    }
    if let Some(c) = predicted.iter().chain(gold).find(|c| !(1..=4).contains(*c)) {
        return Err(MetricError::UnknownClass(*c));
    }
    let mut tp = [0usize; 4];
    let mut fp = [0usize; 4];
    let mut fn_ = [0usize; 4];
    for (&p, &g) in predicted.iter().zip(gold) {
        let (p, g) = (p as usize - 1, g as usize - 1);
        if p == g {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[g] += 1;
        }
    }
    let per_class_f1: [f64; 4] = std::array::from_fn(|c| {
        let denom = 2 * tp[c] + fp[c] + fn_[c];
        if tp[c] == 0 {
            0.0
        } else {
            2.0 * tp[c] as f64 / denom as f64
        }
    });
    Ok(ClassificationScores {
        accuracy: tp.iter().sum::<usize>() as f64 / predicted.len() as f64,
        macro_f1: per_class_f1.iter().sum::<f64>() / 4.0,
        per_class_f1,
    })
}
