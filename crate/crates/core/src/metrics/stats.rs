//! Summary statistics and Student t-tests.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::MetricError;

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub t: f64,
    pub p_two_sided: f64,
    /// Set when the sample has zero variance and p was assigned rather than
    /// computed.
    pub degenerate: bool,
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom, via the
/// regularized incomplete beta function.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// One-sample Student t-test of `mean(xs) = mu0`.
pub fn one_sample_ttest(xs: &[f64], mu0: f64) -> Result<TTest, MetricError> {
    let n = xs.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples(n));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(MetricError::NonFinite("t-test sample".into()));
    }
    let m = mean(xs).expect("non-empty");
    let s = sample_std(xs).expect("n >= 2");
    let diff = m - mu0;
    if s == 0.0 {
        let (t, p) = if diff == 0.0 { (0.0, 1.0) } else { (diff.signum() * f64::INFINITY, 0.0) };
        return Ok(TTest { n, mean: m, std: s, t, p_two_sided: p, degenerate: true });
    }
    let t = diff / (s / (n as f64).sqrt());
    Ok(TTest { n, mean: m, std: s, t, p_two_sided: t_two_sided_p(t, (n - 1) as f64), degenerate: false })
}

/// Paired t-test: a one-sample test of the differences `x - y` against 0.
pub fn paired_ttest(x: &[f64], y: &[f64]) -> Result<TTest, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    one_sample_ttest(&d, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_deltas_are_degenerate() {
        let t = one_sample_ttest(&[0.0; 5], 0.0).unwrap();
        assert_eq!(t.p_two_sided, 1.0);
        assert!(t.degenerate);
        let t = one_sample_ttest(&[0.5; 5], 0.0).unwrap();
        assert_eq!(t.p_two_sided, 0.0);
        assert!(t.degenerate);
    }

    #[test]
    fn one_to_five() {
        let t = one_sample_ttest(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.0).unwrap();
        assert!((t.std - 1.5811388300841898).abs() < 1e-15);
        assert!((t.t - 4.242640687119285).abs() < 1e-12);
        // scipy.stats.ttest_1samp([1, 2, 3, 4, 5], 0).pvalue
        assert!((t.p_two_sided - 0.013235599563682690).abs() < 1e-12, "{}", t.p_two_sided);
    }

    #[test]
    fn paired_identical() {
        let x = [1.0, 4.0, 2.5];
        assert_eq!(paired_ttest(&x, &x).unwrap().p_two_sided, 1.0);
        assert!(paired_ttest(&x, &x[..2]).is_err());
        assert!(one_sample_ttest(&[1.0], 0.0).is_err());
    }

    #[test]
    fn std_textbook() {
        assert_eq!(sample_std(&[1.0, 3.0]), Some(std::f64::consts::SQRT_2));
        assert_eq!(sample_std(&[1.0]), None);
    }
}
