//! Seeded synthetic admission notes with known demographics and vitals.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::engine::derive_seed;
use crate::model::{DemographicProfile, Ethnicity, Gender, VitalKind, VitalReading, VitalSet, VitalValue};
use crate::taxonomy::los_bucket;

use super::MockError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VitalDist {
    pub mean: f64,
    pub std: f64,
    pub missing: f64,
}

impl VitalDist {
    const fn new(mean: f64, std: f64, missing: f64) -> Self {
        VitalDist { mean, std, missing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub n_notes: usize,
    pub seed: u64,
    pub male_fraction: f64,
    /// Weights in [`Ethnicity::ALL`] order.
    pub ethnicity_weights: [f64; 5],
    pub age_mean: f64,
    pub age_std: f64,
    pub temperature: VitalDist,
    pub heart_rate: VitalDist,
    pub respiration_rate: VitalDist,
    pub oxygen_saturation: VitalDist,
    pub systolic: VitalDist,
    /// Missingness of the pair is taken from `systolic`.
    pub diastolic: VitalDist,
    /// Std of the noise added to the stay length behind the gold class.
    pub los_noise_days: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_notes: 100,
            seed: 0,
            male_fraction: 0.552,
            ethnicity_weights: [4.0, 10.2, 3.5, 13.2, 69.1],
            age_mean: 63.64,
            age_std: 16.85,
            temperature: VitalDist::new(97.10, 7.69, 0.27),
            heart_rate: VitalDist::new(83.86, 20.47, 0.057),
            respiration_rate: VitalDist::new(18.93, 5.38, 0.12),
            oxygen_saturation: VitalDist::new(96.99, 3.49, 0.051),
            systolic: VitalDist::new(128.90, 24.15, 0.043),
            diastolic: VitalDist::new(71.03, 15.46, 0.043),
            los_noise_days: 3.0,
        }
    }
}

impl CorpusSpec {
    pub fn new(n_notes: usize, seed: u64) -> Self {
        CorpusSpec { n_notes, seed, ..Default::default() }
    }

    /// Every note carries all five vitals at a fixed normal value.
    pub fn normal_baseline(n_notes: usize, seed: u64) -> Self {
        CorpusSpec {
            n_notes,
            seed,
            temperature: VitalDist::new(98.0, 0.0, 0.0),
            heart_rate: VitalDist::new(70.0, 0.0, 0.0),
            respiration_rate: VitalDist::new(16.0, 0.0, 0.0),
            oxygen_saturation: VitalDist::new(98.0, 0.0, 0.0),
            systolic: VitalDist::new(110.0, 0.0, 0.0),
            diastolic: VitalDist::new(70.0, 0.0, 0.0),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), MockError> {
        let bad = |m: &str| Err(MockError::Corpus(m.to_string()));
        if self.n_notes == 0 {
            return bad("n_notes must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.male_fraction) {
            return bad("male_fraction must be in [0, 1]");
        }
        if self.ethnicity_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || self.ethnicity_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("ethnicity weights must be non-negative with a positive sum");
        }
        let dists = [
            self.temperature,
            self.heart_rate,
            self.respiration_rate,
            self.oxygen_saturation,
            self.systolic,
            self.diastolic,
        ];
        for d in dists {
            if !(0.0..=1.0).contains(&d.missing) {
                return bad("missingness rates must be in [0, 1]");
            }
            if !(d.mean.is_finite() && d.std.is_finite() && d.std >= 0.0) {
                return bad("vital mean and std must be finite, std non-negative");
            }
        }
        if !(self.age_std >= 0.0 && self.age_mean.is_finite() && self.los_noise_days >= 0.0) {
            return bad("age and noise parameters must be finite and non-negative");
        }
        Ok(())
    }
}

/// One generated note in the standard notes JSONL shape, plus the vitals
/// that were written into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusNote {
    pub note_id: String,
    pub text: String,
    pub structured: DemographicProfile,
    pub gold_los_class: u8,
    pub planted: VitalSet,
}

fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64, lo: f64, hi: f64) -> f64 {
    if std == 0.0 {
        return mean.clamp(lo, hi);
    }
    let normal = Normal::new(mean, std).expect("std checked");
    for _ in 0..1000 {
        let x = normal.sample(rng);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
    mean.clamp(lo, hi)
}

fn vital_domain(kind: VitalKind) -> [(f64, f64); 2] {
    match kind {
        VitalKind::Temperature => [(70.0, 110.0); 2],
        VitalKind::HeartRate => [(1.0, 200.0); 2],
        VitalKind::RespirationRate => [(1.0, 50.0); 2],
        VitalKind::OxygenSaturation => [(1.0, 100.0); 2],
        VitalKind::BloodPressure => [(1.0, 220.0), (1.0, 140.0)],
    }
}

fn sample_component(rng: &mut ChaCha8Rng, kind: VitalKind, d: VitalDist, (lo, hi): (f64, f64)) -> f64 {
    let x = truncated_normal(rng, d.mean, d.std, lo, hi);
    let steps = kind.steps_per_unit() as f64;
    kind.from_steps(((x * steps).round() as i64).clamp((lo * steps) as i64, (hi * steps) as i64))
}

fn sample_vitals(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> VitalSet {
    let mut set = VitalSet::new();
    let scalars = [
        (VitalKind::Temperature, spec.temperature),
        (VitalKind::HeartRate, spec.heart_rate),
        (VitalKind::RespirationRate, spec.respiration_rate),
        (VitalKind::OxygenSaturation, spec.oxygen_saturation),
    ];
    // draw everything before dropping so missingness does not shift the stream
    let mut drawn = Vec::new();
    for (kind, d) in scalars {
        let v = sample_component(rng, kind, d, vital_domain(kind)[0]);
        drawn.push((kind, VitalValue::Scalar(v), rng.random::<f64>() < d.missing));
    }
    let [sd, dd] = vital_domain(VitalKind::BloodPressure);
    let sys = sample_component(rng, VitalKind::BloodPressure, spec.systolic, sd);
    let dia = sample_component(rng, VitalKind::BloodPressure, spec.diastolic, dd);
    drawn.push((VitalKind::BloodPressure, VitalValue::pair(sys, dia), rng.random::<f64>() < spec.systolic.missing));
    for (kind, value, missing) in drawn {
        if !missing {
            set.insert(VitalReading::new(kind, value, None).expect("sampled inside the domain"));
        }
    }
    set
}

const COMPLAINTS: [&str; 6] = ["Chest pain", "Shortness of breath", "Abdominal pain", "Fever", "Syncope", "Weakness"];
const HISTORIES: [&str; 5] =
    ["hypertension", "type 2 diabetes", "COPD", "coronary artery disease", "chronic kidney disease"];
const MEDICATIONS: [&str; 5] = ["Lisinopril 10 mg daily", "Metformin 500 mg BID", "Aspirin 81 mg daily", "Atorvastatin 40 mg daily", "Albuterol inhaler PRN"];
const SERVICES: [&str; 3] = ["MEDICINE", "SURGERY", "CARDIOLOGY"];

fn pronouns(g: Gender) -> (&'static str, &'static str, &'static str) {
    match g {
        Gender::F => ("female", "She", "Her"),
        Gender::M => ("male", "He", "His"),
    }
}

fn vitals_line(v: &VitalSet) -> String {
    let items: Vec<String> = [
        (VitalKind::Temperature, "T", ""),
        (VitalKind::BloodPressure, "BP", ""),
        (VitalKind::HeartRate, "HR", ""),
        (VitalKind::RespirationRate, "RR", ""),
        (VitalKind::OxygenSaturation, "O2Sat", "% on RA"),
    ]
    .into_iter()
    .filter_map(|(kind, label, suffix)| v.get(kind).map(|r| format!("{label}: {}{suffix}", r.value.render(kind))))
    .collect();
    if items.is_empty() {
        "Vitals: not recorded.".into()
    } else {
        format!("Vitals: {}.", items.join(", "))
    }
}

fn render_note(rng: &mut ChaCha8Rng, profile: &DemographicProfile, vitals: &VitalSet) -> String {
    let gender = profile.gender.unwrap_or(Gender::F);
    let (noun, subj, poss) = pronouns(gender);
    let complaint = *COMPLAINTS.choose(rng).expect("non-empty");
    let history: Vec<&str> = HISTORIES.choose_multiple(rng, 2).copied().collect();
    let meds: Vec<&str> = MEDICATIONS.choose_multiple(rng, 2).copied().collect();
    let service = *SERVICES.choose(rng).expect("non-empty");
    let onset = rng.random_range(1..=7);
    format!(
        "Name: ___ Unit No: ___\n\
         Admission Date: ___ Discharge Date: ___\n\
         Sex: {sex}\n\
         Service: {service}\n\
         \n\
         CHIEF COMPLAINT: {complaint}\n\
         \n\
         PRESENT ILLNESS: The patient is a ___ year-old {noun} with a history of {h0} and {h1} who presents with {lc}. \
         {poss} symptoms began {onset} days ago. {subj} was admitted for further management.\n\
         \n\
         MEDICAL HISTORY: {h0_cap}, {h1}\n\
         \n\
         MEDICATION ON ADMISSION: {m0}; {m1}\n\
         \n\
         ALLERGIES: No Known Allergies\n\
         \n\
         PHYSICAL EXAM: On Admission:\n\
         {vitals}\n\
         General: alert and oriented, no acute distress\n\
         Lungs: clear to auscultation bilaterally\n\
         \n\
         FAMILY HISTORY: Noncontributory\n\
         \n\
         SOCIAL HISTORY: ___\n\
         \n\
         BRIEF HOSPITAL COURSE: ___\n\
         \n\
         DISCHARGE DIAGNOSIS: ___\n",
        sex = gender.as_str(),
        h0 = history[0],
        h1 = history[1],
        h0_cap = capitalize(history[0]),
        lc = complaint.to_lowercase(),
        m0 = meds[0],
        m1 = meds[1],
        vitals = vitals_line(vitals),
    )
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

/// Generates the corpus described by `spec`. Note `i` draws from its own
/// stream, so a prefix of a larger corpus equals the smaller corpus.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusNote>, MockError> {
    spec.validate()?;
    let ethnicity = WeightedIndex::new(spec.ethnicity_weights).map_err(|e| MockError::Corpus(e.to_string()))?;
    let noise = Normal::new(0.0, spec.los_noise_days).map_err(|e| MockError::Corpus(e.to_string()))?;
    let notes = (0..spec.n_notes)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[&spec.seed.to_string(), "note", &i.to_string()]));
            let gender = if rng.random::<f64>() < spec.male_fraction { Gender::M } else { Gender::F };
            let eth = Ethnicity::ALL[ethnicity.sample(&mut rng)];
            let age = truncated_normal(&mut rng, spec.age_mean, spec.age_std, 18.0, 100.0).round() as u8;
            let profile = DemographicProfile { age_years: Some(age), gender: Some(gender), ethnicity: Some(eth) };
            let vitals = sample_vitals(&mut rng, spec);
            let days = (7.0 + vitals.severity_sum() as f64 + noise.sample(&mut rng)).clamp(1.0, 30.0);
            let text = render_note(&mut rng, &profile, &vitals);
            CorpusNote {
                note_id: format!("n{:04}", i + 1),
                text,
                structured: profile,
                gold_los_class: los_bucket(days).expect("positive stay"),
                planted: vitals,
            }
        })
        .collect();
    Ok(notes)
}
