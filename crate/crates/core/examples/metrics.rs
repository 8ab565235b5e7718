//! Pairwise behaviour metrics and the t-tests used by the report.
//!
//!     cargo run --example metrics

use clinprobe::metrics::{delta_e, expected_los, is_flip, jsd, one_sample_ttest, paired_ttest};
use clinprobe::model::LosDistribution;
use clinprobe::taxonomy::LosReference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = LosReference::default();
    let orig = LosDistribution::new([0.1, 0.6, 0.2, 0.1])?;
    let cf = LosDistribution::new([0.05, 0.35, 0.4, 0.2])?;
    println!("E[orig] = {:.3} days", expected_los(&orig, &reference));
    println!("E[cf]   = {:.3} days", expected_los(&cf, &reference));
    println!("dE = {:+.3}, JSD = {:.4}, flip = {}", delta_e(&orig, &cf, &reference), jsd(&orig, &cf), is_flip(&orig, &cf));

    let shifts = [0.8, 1.1, 0.4, 1.6, 0.9, 1.3];
    let t = one_sample_ttest(&shifts, 0.0)?;
    println!("one-sample: mean {:.3} t {:.3} p {:.4}", t.mean, t.t, t.p_two_sided);
    let before = [-2.1, -2.3, -1.9, -2.0];
    let after = [-2.0, -2.35, -1.7, -1.95];
    let p = paired_ttest(&after, &before)?;
    println!("paired: mean {:.3} t {:.3} p {:.4}", p.mean, p.t, p.p_two_sided);
    Ok(())
}
