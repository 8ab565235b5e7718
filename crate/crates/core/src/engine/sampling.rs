//! Seeded sampling of counterfactual values inside a class.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::model::{VitalKind, VitalValue};
use crate::taxonomy::{vital_class, ClassRange, Interval, VitalClassLabel};

use super::EngineError;

/// Values drawn per class.
pub const VALUES_PER_CLASS: usize = 5;

/// Derives a 64-bit seed from a sequence of parts, so that independent
/// streams (per note, per variable, per class) never depend on the order in
/// which they are generated.
pub fn derive_seed(parts: &[&str]) -> u64 {
    let digest = Sha256::digest(parts.join(":").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn steps(kind: VitalKind, iv: &Interval) -> (i64, i64) {
    let lo = kind.to_steps(iv.lo).expect("table bounds sit on the native grid");
    let hi = kind.to_steps(iv.hi).expect("table bounds sit on the native grid");
    (lo, hi)
}

/// Every value of a class at native resolution, enumerated lazily by index.
#[derive(Debug, Clone, Copy)]
pub struct ClassDomain {
    kind: VitalKind,
    first: (i64, i64),
    widths: (i64, i64),
}

impl ClassDomain {
    pub fn new(kind: VitalKind, label: VitalClassLabel) -> Result<Self, EngineError> {
        let class = vital_class(kind, label)?;
        let (first, widths) = match class.range {
            ClassRange::Scalar(iv) => {
                let (lo, hi) = steps(kind, &iv);
                ((lo, 0), (hi - lo + 1, 1))
            }
            ClassRange::Pair { systolic, diastolic } => {
                let (slo, shi) = steps(kind, &systolic);
                let (dlo, dhi) = steps(kind, &diastolic);
                ((slo, dlo), (shi - slo + 1, dhi - dlo + 1))
            }
        };
        if widths.0 <= 0 || widths.1 <= 0 {
            return Err(EngineError::EmptyRange { kind, label });
        }
        Ok(ClassDomain { kind, first, widths })
    }

    pub fn len(&self) -> usize {
        (self.widths.0 * self.widths.1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> VitalValue {
        let i = i as i64;
        match self.kind {
            VitalKind::BloodPressure => VitalValue::pair(
                self.kind.from_steps(self.first.0 + i / self.widths.1),
                self.kind.from_steps(self.first.1 + i % self.widths.1),
            ),
            k => VitalValue::Scalar(k.from_steps(self.first.0 + i)),
        }
    }

    pub fn index_of(&self, value: &VitalValue) -> Option<usize> {
        let idx = match *value {
            VitalValue::Scalar(v) if self.kind != VitalKind::BloodPressure => {
                let s = self.kind.to_steps(v)? - self.first.0;
                (0..self.widths.0).contains(&s).then_some(s)?
            }
            VitalValue::Pair { systolic, diastolic } if self.kind == VitalKind::BloodPressure => {
                let s = self.kind.to_steps(systolic)? - self.first.0;
                let d = self.kind.to_steps(diastolic)? - self.first.1;
                ((0..self.widths.0).contains(&s) && (0..self.widths.1).contains(&d)).then_some(s * self.widths.1 + d)?
            }
            _ => return None,
        };
        Some(idx as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = VitalValue> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// Draws up to five distinct values uniformly without replacement from a
/// class, at native resolution. Blood-pressure components are drawn jointly
/// from the product of the class's systolic and diastolic bands, which makes
/// them independent and uniform. Output is sorted and depends only on the
/// seed.
pub fn sample_class_values(
    kind: VitalKind,
    label: VitalClassLabel,
    rng_seed: u64,
) -> Result<Vec<VitalValue>, EngineError> {
    sample_class_values_excluding(kind, label, rng_seed, None)
}

/// As [`sample_class_values`], but never returns `exclude`. The draw is made
/// from the remaining values, so the count is `min(5, |class| - 1)` when the
/// excluded value lies in the class.
pub fn sample_class_values_excluding(
    kind: VitalKind,
    label: VitalClassLabel,
    rng_seed: u64,
    exclude: Option<&VitalValue>,
) -> Result<Vec<VitalValue>, EngineError> {
    let domain = ClassDomain::new(kind, label)?;
    let skip = exclude.and_then(|v| domain.index_of(v));
    let available = domain.len() - usize::from(skip.is_some());
    let amount = VALUES_PER_CLASS.min(available);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut picks: Vec<usize> = index::sample(&mut rng, available, amount)
        .into_iter()
        .map(|i| match skip {
            Some(s) if i >= s => i + 1,
            _ => i,
        })
        .collect();
    picks.sort_unstable();
    Ok(picks.into_iter().map(|i| domain.get(i)).collect())
}
