//! Clinical classification tables: vital-sign classes with severity scores,
//! age classes, and length-of-stay buckets.
//!
//! Every range is inclusive at both ends. Values that fall between two
//! printed bounds (for example a temperature of 94.95 °F) belong to no class
//! and are rejected rather than rounded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{VitalKind, VitalValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaxonomyError {
    #[error("{kind} value {value} is outside every class range")]
    OutOfRange { kind: VitalKind, value: String },
    #[error("{kind} expects a {expected} value")]
    Shape { kind: VitalKind, expected: &'static str },
    #[error("no {label:?} class for {kind}")]
    UnknownClass { kind: VitalKind, label: VitalClassLabel },
    #[error("age {0} is outside 18..=100")]
    AgeOutOfRange(i64),
    #[error("length of stay must be positive, got {0}")]
    NonPositiveLos(f64),
    #[error("LOS class id must be 1..=4, got {0}")]
    UnknownLosClass(u8),
    #[error("reference days {days} are not admissible for LOS class {class_id}")]
    BadReference { class_id: u8, days: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VitalClassLabel {
    Ltl,
    VeryLow,
    Low,
    Normal,
    Elevated,
    High,
    VeryHigh,
    Lth,
}

impl VitalClassLabel {
    pub fn display_name(self) -> &'static str {
        match self {
            VitalClassLabel::Ltl => "LTL",
            VitalClassLabel::VeryLow => "Very low",
            VitalClassLabel::Low => "Low",
            VitalClassLabel::Normal => "Normal",
            VitalClassLabel::Elevated => "Elevated",
            VitalClassLabel::High => "High",
            VitalClassLabel::VeryHigh => "Very high",
            VitalClassLabel::Lth => "LTH",
        }
    }
}

/// Inclusive numeric interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassRange {
    Scalar(Interval),
    Pair { systolic: Interval, diastolic: Interval },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VitalClass {
    pub kind: VitalKind,
    pub label: VitalClassLabel,
    pub range: ClassRange,
    pub severity: i32,
}

const fn scalar(kind: VitalKind, label: VitalClassLabel, lo: f64, hi: f64, severity: i32) -> VitalClass {
    VitalClass { kind, label, range: ClassRange::Scalar(Interval::new(lo, hi)), severity }
}

const fn pair(
    label: VitalClassLabel,
    sys: (f64, f64),
    dia: (f64, f64),
    severity: i32,
) -> VitalClass {
    VitalClass {
        kind: VitalKind::BloodPressure,
        label,
        range: ClassRange::Pair {
            systolic: Interval::new(sys.0, sys.1),
            diastolic: Interval::new(dia.0, dia.1),
        },
        severity,
    }
}

use VitalClassLabel::*;
use VitalKind::*;

static HEART_RATE: [VitalClass; 6] = [
    scalar(HeartRate, VeryLow, 1.0, 40.0, -3),
    scalar(HeartRate, Low, 41.0, 50.0, -1),
    scalar(HeartRate, Normal, 51.0, 90.0, 0),
    scalar(HeartRate, High, 91.0, 110.0, 1),
    scalar(HeartRate, VeryHigh, 111.0, 130.0, 2),
    scalar(HeartRate, Lth, 131.0, 200.0, 3),
];

// The life-threatening systolic band starts at 180; the printed lower bound
// of 80 would overlap every other class.
static BLOOD_PRESSURE: [VitalClass; 7] = [
    pair(VeryLow, (1.0, 70.0), (1.0, 40.0), -3),
    pair(Low, (71.0, 89.0), (41.0, 59.0), -1),
    pair(Normal, (90.0, 119.0), (60.0, 79.0), 0),
    pair(Elevated, (120.0, 129.0), (60.0, 79.0), 1),
    pair(High, (130.0, 139.0), (80.0, 89.0), 2),
    pair(VeryHigh, (140.0, 179.0), (90.0, 119.0), 3),
    pair(Lth, (180.0, 220.0), (120.0, 140.0), 4),
];

static RESPIRATION_RATE: [VitalClass; 5] = [
    scalar(RespirationRate, VeryLow, 1.0, 8.0, -2),
    scalar(RespirationRate, Low, 9.0, 11.0, -1),
    scalar(RespirationRate, Normal, 12.0, 20.0, 0),
    scalar(RespirationRate, High, 21.0, 24.0, 1),
    scalar(RespirationRate, VeryHigh, 25.0, 50.0, 2),
];

static OXYGEN_SATURATION: [VitalClass; 4] = [
    scalar(OxygenSaturation, Ltl, 1.0, 91.0, -3),
    scalar(OxygenSaturation, VeryLow, 92.0, 93.0, -2),
    scalar(OxygenSaturation, Low, 94.0, 95.0, -1),
    scalar(OxygenSaturation, Normal, 96.0, 100.0, 0),
];

static TEMPERATURE: [VitalClass; 6] = [
    scalar(Temperature, Ltl, 70.0, 82.4, -3),
    scalar(Temperature, VeryLow, 82.5, 89.4, -2),
    scalar(Temperature, Low, 89.5, 94.9, -1),
    scalar(Temperature, Normal, 95.0, 100.2, 0),
    scalar(Temperature, High, 100.3, 103.9, 1),
    scalar(Temperature, Lth, 104.0, 110.0, 3),
];

/// All classes of a vital kind, ordered from lowest to highest range.
pub fn vital_classes(kind: VitalKind) -> &'static [VitalClass] {
    match kind {
        HeartRate => &HEART_RATE,
        BloodPressure => &BLOOD_PRESSURE,
        RespirationRate => &RESPIRATION_RATE,
        OxygenSaturation => &OXYGEN_SATURATION,
        Temperature => &TEMPERATURE,
    }
}

pub fn vital_class(kind: VitalKind, label: VitalClassLabel) -> Result<&'static VitalClass, TaxonomyError> {
    vital_classes(kind)
        .iter()
        .find(|c| c.label == label)
        .ok_or(TaxonomyError::UnknownClass { kind, label })
}

/// Classifies a vital value and returns its class and severity.
///
/// Blood pressure is classified per component: the systolic reading selects
/// the class whose systolic band contains it, the diastolic reading selects
/// the least severe class whose diastolic band contains it (Normal and
/// Elevated share 60-79). The pair takes whichever component class has the
/// larger absolute severity, ties going to the higher severity.
pub fn classify_vital(
    kind: VitalKind,
    value: &VitalValue,
) -> Result<(&'static VitalClass, i32), TaxonomyError> {
    let classes = vital_classes(kind);
    let out_of_range = || TaxonomyError::OutOfRange { kind, value: value.render(kind) };
    match (kind, value) {
        (BloodPressure, VitalValue::Pair { systolic, diastolic }) => {
            let sys = classes
                .iter()
                .find(|c| matches!(c.range, ClassRange::Pair { systolic: s, .. } if s.contains(*systolic)))
                .ok_or_else(out_of_range)?;
            let dia = classes
                .iter()
                .filter(|c| matches!(c.range, ClassRange::Pair { diastolic: d, .. } if d.contains(*diastolic)))
                .min_by_key(|c| c.severity.abs())
                .ok_or_else(out_of_range)?;
            let worse = match sys.severity.abs().cmp(&dia.severity.abs()) {
                std::cmp::Ordering::Greater => sys,
                std::cmp::Ordering::Less => dia,
                std::cmp::Ordering::Equal => {
                    if sys.severity >= dia.severity {
                        sys
                    } else {
                        dia
                    }
                }
            };
            Ok((worse, worse.severity))
        }
        (BloodPressure, VitalValue::Scalar(_)) => Err(TaxonomyError::Shape { kind, expected: "paired" }),
        (_, VitalValue::Scalar(v)) => {
            let class = classes
                .iter()
                .find(|c| matches!(c.range, ClassRange::Scalar(i) if i.contains(*v)))
                .ok_or_else(out_of_range)?;
            Ok((class, class.severity))
        }
        (_, VitalValue::Pair { .. }) => Err(TaxonomyError::Shape { kind, expected: "scalar" }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeClass {
    YoungAdults,
    MiddleAged,
    OlderAdults,
    Elderly,
}

impl AgeClass {
    pub const ALL: [AgeClass; 4] =
        [AgeClass::YoungAdults, AgeClass::MiddleAged, AgeClass::OlderAdults, AgeClass::Elderly];

    pub fn range(self) -> (u8, u8) {
        match self {
            AgeClass::YoungAdults => (18, 35),
            AgeClass::MiddleAged => (36, 55),
            AgeClass::OlderAdults => (56, 75),
            AgeClass::Elderly => (76, 100),
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AgeClass::YoungAdults => "young adults",
            AgeClass::MiddleAged => "middle aged adults",
            AgeClass::OlderAdults => "older adults",
            AgeClass::Elderly => "elderly",
        }
    }
}

pub fn classify_age(years: i64) -> Result<AgeClass, TaxonomyError> {
    AgeClass::ALL
        .into_iter()
        .find(|c| {
            let (lo, hi) = c.range();
            (lo as i64..=hi as i64).contains(&years)
        })
        .ok_or(TaxonomyError::AgeOutOfRange(years))
}

/// Severity change between an original and a counterfactual vital value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityShift {
    pub original_severity: i32,
    pub counterfactual_severity: i32,
    pub shift_raw: i32,
    pub shift_binned: i32,
}

impl SeverityShift {
    pub const MAX_BIN: i32 = 4;

    pub fn new(original_severity: i32, counterfactual_severity: i32) -> Self {
        let shift_raw = counterfactual_severity - original_severity;
        SeverityShift {
            original_severity,
            counterfactual_severity,
            shift_raw,
            shift_binned: shift_raw.clamp(-Self::MAX_BIN, Self::MAX_BIN),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.shift_raw == self.counterfactual_severity - self.original_severity
            && self.shift_binned == self.shift_raw.clamp(-Self::MAX_BIN, Self::MAX_BIN)
    }
}

pub fn severity_shift(
    kind: VitalKind,
    original: &VitalValue,
    counterfactual: &VitalValue,
) -> Result<SeverityShift, TaxonomyError> {
    let (_, orig) = classify_vital(kind, original)?;
    let (_, cf) = classify_vital(kind, counterfactual)?;
    Ok(SeverityShift::new(orig, cf))
}

/// Per-class reference days used to turn a LOS distribution into an
/// expected length of stay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosReference {
    days: [f64; 4],
}

impl Default for LosReference {
    fn default() -> Self {
        LosReference { days: [3.0, 7.0, 14.0, 21.0] }
    }
}

impl LosReference {
    pub fn new(days: [f64; 4]) -> Result<Self, TaxonomyError> {
        let admissible = [
            |d: f64| d > 0.0 && d <= 3.0,
            |d: f64| d > 3.0 && d <= 7.0,
            |d: f64| d > 7.0 && d <= 14.0,
            |d: f64| d > 14.0 && d.is_finite(),
        ];
        for (i, (&d, ok)) in days.iter().zip(admissible).enumerate() {
            if !ok(d) {
                return Err(TaxonomyError::BadReference { class_id: i as u8 + 1, days: d });
            }
        }
        Ok(LosReference { days })
    }

    pub fn days(&self) -> [f64; 4] {
        self.days
    }

    pub fn reference_days(&self, class_id: u8) -> Result<f64, TaxonomyError> {
        match class_id {
            1..=4 => Ok(self.days[class_id as usize - 1]),
            _ => Err(TaxonomyError::UnknownLosClass(class_id)),
        }
    }
}

/// LOS class 1..=4 for a stay of `days` days.
pub fn los_bucket(days: f64) -> Result<u8, TaxonomyError> {
    if !(days > 0.0) {
        return Err(TaxonomyError::NonPositiveLos(days));
    }
    Ok(if days <= 3.0 {
        1
    } else if days <= 7.0 {
        2
    } else if days <= 14.0 {
        3
    } else {
        4
    })
}

pub const LOS_CLASS_DEFINITIONS: [&str; 4] =
    ["≤ 3 days", "> 3 and ≤ 7 days", "> 7 and ≤ 14 days", "> 14 days"];

/// Machine-readable dump of every encoded range, for external audit.
pub fn taxonomy_json() -> serde_json::Value {
    let vitals: serde_json::Map<String, serde_json::Value> = VitalKind::ALL
        .iter()
        .map(|&k| (k.as_str().to_string(), serde_json::to_value(vital_classes(k)).expect("static table")))
        .collect();
    let ages: Vec<_> = AgeClass::ALL
        .iter()
        .map(|c| {
            let (lo, hi) = c.range();
            serde_json::json!({ "label": c, "lo": lo, "hi": hi })
        })
        .collect();
    let reference = LosReference::default().days();
    let los: Vec<_> = (0..4)
        .map(|i| {
            serde_json::json!({
                "class_id": i + 1,
                "definition": LOS_CLASS_DEFINITIONS[i],
                "reference_days": reference[i],
            })
        })
        .collect();
    serde_json::json!({ "vitals": vitals, "age": ages, "los": los })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(v: f64) -> VitalValue {
        VitalValue::Scalar(v)
    }

    #[test]
    fn heart_rate_examples() {
        let (c, s) = classify_vital(HeartRate, &sc(94.0)).unwrap();
        assert_eq!((c.label, s), (High, 1));
        let (c, s) = classify_vital(Temperature, &sc(96.9)).unwrap();
        assert_eq!((c.label, s), (Normal, 0));
        let (c, s) = classify_vital(OxygenSaturation, &sc(96.0)).unwrap();
        assert_eq!((c.label, s), (Normal, 0));
    }

    #[test]
    fn blood_pressure_takes_worse_component() {
        // systolic 118 is Normal (0); diastolic 51 is Low (-1).
        let (c, s) = classify_vital(BloodPressure, &VitalValue::pair(118.0, 51.0)).unwrap();
        assert_eq!((c.label, s), (Low, -1));
        // diastolic 60-79 alone never makes a reading Elevated
        let (c, _) = classify_vital(BloodPressure, &VitalValue::pair(100.0, 70.0)).unwrap();
        assert_eq!(c.label, Normal);
        let (c, _) = classify_vital(BloodPressure, &VitalValue::pair(125.0, 70.0)).unwrap();
        assert_eq!(c.label, Elevated);
        // equal magnitudes resolve to the higher severity
        let (c, _) = classify_vital(BloodPressure, &VitalValue::pair(150.0, 30.0)).unwrap();
        assert_eq!(c.label, VeryHigh);
    }

    #[test]
    fn seams_and_shapes_are_rejected() {
        assert!(classify_vital(Temperature, &sc(94.95)).is_err());
        assert!(classify_vital(HeartRate, &sc(0.0)).is_err());
        assert!(classify_vital(HeartRate, &sc(201.0)).is_err());
        assert!(matches!(
            classify_vital(BloodPressure, &sc(120.0)),
            Err(TaxonomyError::Shape { .. })
        ));
        assert!(classify_vital(HeartRate, &VitalValue::pair(1.0, 2.0)).is_err());
        assert!(classify_vital(BloodPressure, &VitalValue::pair(221.0, 80.0)).is_err());
    }

    #[test]
    fn ages() {
        assert_eq!(classify_age(67).unwrap(), AgeClass::OlderAdults);
        assert_eq!(classify_age(18).unwrap(), AgeClass::YoungAdults);
        assert_eq!(classify_age(76).unwrap(), AgeClass::Elderly);
        assert_eq!(classify_age(35).unwrap(), AgeClass::YoungAdults);
        assert_eq!(classify_age(36).unwrap(), AgeClass::MiddleAged);
        assert!(classify_age(17).is_err());
        assert!(classify_age(101).is_err());
    }

    #[test]
    fn severity_shifts() {
        let normal = VitalValue::pair(110.0, 70.0);
        let lth = VitalValue::pair(190.0, 130.0);
        assert_eq!(severity_shift(BloodPressure, &normal, &lth).unwrap().shift_raw, 4);
        assert_eq!(severity_shift(HeartRate, &sc(30.0), &sc(70.0)).unwrap().shift_raw, 3);
        let s = severity_shift(BloodPressure, &VitalValue::pair(60.0, 30.0), &lth).unwrap();
        assert_eq!((s.shift_raw, s.shift_binned), (7, 4));
        assert_eq!(severity_shift(HeartRate, &sc(60.0), &sc(70.0)).unwrap().shift_raw, 0);
    }

    #[test]
    fn los_buckets() {
        assert_eq!(los_bucket(3.0).unwrap(), 1);
        assert_eq!(los_bucket(3.0001).unwrap(), 2);
        assert_eq!(los_bucket(7.0).unwrap(), 2);
        assert_eq!(los_bucket(7.0001).unwrap(), 3);
        assert_eq!(los_bucket(14.0).unwrap(), 3);
        assert_eq!(los_bucket(14.5).unwrap(), 4);
        assert!(los_bucket(0.0).is_err());
        assert!(los_bucket(-2.0).is_err());
        assert!(los_bucket(f64::NAN).is_err());
        let r = LosReference::default();
        assert_eq!(r.reference_days(4).unwrap(), 21.0);
        assert!(r.reference_days(5).is_err());
        assert!(LosReference::new([3.0, 7.0, 15.0, 21.0]).is_err());
        assert!(LosReference::new([2.4, 5.1, 10.2, 30.0]).is_ok());
    }

    #[test]
    fn json_export_lists_all_kinds() {
        let j = taxonomy_json();
        for k in VitalKind::ALL {
            assert!(j["vitals"][k.as_str()].is_array());
        }
        assert_eq!(j["vitals"]["blood_pressure"][6]["range"]["pair"]["systolic"]["lo"], 180.0);
    }
}
