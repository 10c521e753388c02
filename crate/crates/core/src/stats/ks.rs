use super::special::{kolmogorov_q, norm_cdf};
use super::{StatsError, TestMethod, TestOutcome};

/// One-sample Kolmogorov–Smirnov test against N(0, 1).
///
/// The p-value uses the asymptotic Kolmogorov tail at
/// `λ = (√n + 0.12 + 0.11/√n)·D`.
pub fn ks_test_standard_normal(samples: &[f64]) -> Result<TestOutcome, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = norm_cdf(x);
            let hi = (i + 1) as f64 / n;
            let lo = i as f64 / n;
            (hi - f).abs().max((lo - f).abs())
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(TestOutcome { method: TestMethod::KolmogorovSmirnov, statistic: d, p_value: kolmogorov_q(lambda), n: sorted.len(), k: None })
}
