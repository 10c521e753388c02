use serde::{Deserialize, Serialize};

use super::friedman::{midranks, tie_sizes};
use super::special::norm_cdf;
use super::{StatsError, TestMethod, TestOutcome};

/// Largest effective sample size evaluated by exact sign enumeration.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonOutcome {
    pub outcome: TestOutcome,
    pub w_plus: f64,
    pub w_minus: f64,
    pub exact: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and `W = min(W⁺, W⁻)`. For up to
/// [`EXACT_LIMIT`] nonzero differences the p-value is the fraction of all sign
/// assignments of the (mid)ranks whose statistic is at most `W`; beyond that a
/// continuity-corrected normal approximation with tie-adjusted variance is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonOutcome, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w_minus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    let w = w_plus.min(w_minus);
    let n = diffs.len();

    let (p_value, exact) = if n <= EXACT_LIMIT {
        // Midranks are multiples of 1/2; doubling keeps the enumeration in integers.
        let doubled: Vec<u64> = ranks.iter().map(|r| (r * 2.0).round() as u64).collect();
        let total: u64 = doubled.iter().sum();
        let observed = (w * 2.0).round() as u64;
        let mut hits = 0u64;
        for mask in 0u32..(1u32 << n) {
            let t: u64 = doubled.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum();
            if t.min(total - t) <= observed {
                hits += 1;
            }
        }
        (hits as f64 / f64::from(1u32 << n), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let ties: f64 = tie_sizes(&abs).iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let z = ((mean - w).abs() - 0.5).max(0.0) / var.sqrt();
        ((2.0 * (1.0 - norm_cdf(z))).min(1.0), false)
    };
    Ok(WilcoxonOutcome {
        outcome: TestOutcome { method: TestMethod::WilcoxonSignedRank, statistic: w, p_value: p_value.clamp(0.0, 1.0), n, k: None },
        w_plus,
        w_minus,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: doubled lower-tail probability of T⁺ by recursive
    /// enumeration, capped at 1.
    fn oracle(diffs: &[f64]) -> f64 {
        let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
        let ranks = midranks(&abs);
        let wp: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let total: f64 = ranks.iter().sum();
        let w = wp.min(total - wp);
        fn count(r: &[f64], i: usize, acc: f64, w: f64) -> u64 {
            if i == r.len() {
                return u64::from(acc <= w + 1e-9);
            }
            count(r, i + 1, acc, w) + count(r, i + 1, acc + r[i], w)
        }
        let lower = count(&ranks, 0, 0.0, w) as f64 / 2f64.powi(ranks.len() as i32);
        (2.0 * lower).min(1.0)
    }

    #[test]
    fn three_positive_differences() {
        let o = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap();
        assert_eq!(o.outcome.statistic, 0.0);
        assert_eq!(o.outcome.p_value, 0.25);
        assert!(o.exact);
    }

    #[test]
    fn all_zero() {
        assert_eq!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(), StatsError::AllZeroDifferences);
    }

    #[test]
    fn normal_approximation_for_large_n() {
        let a: Vec<f64> = (0..30).map(|i| f64::from(i) + 0.5).collect();
        let b: Vec<f64> = (0..30).map(f64::from).collect();
        let o = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!o.exact);
        assert!(o.outcome.p_value < 1e-4);
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration(d in proptest::collection::vec(-6i32..7, 1..9)) {
            let diffs: Vec<f64> = d.into_iter().filter(|v| *v != 0).map(f64::from).collect();
            prop_assume!(!diffs.is_empty());
            let zeros = vec![0.0; diffs.len()];
            let o = wilcoxon_signed_rank(&diffs, &zeros).unwrap();
            prop_assert!((o.outcome.p_value - oracle(&diffs)).abs() < 1e-15);
        }

        #[test]
        fn swap_is_antisymmetric(a in proptest::collection::vec(0.0f64..1.0, 1..20), b in proptest::collection::vec(0.0f64..1.0, 1..20)) {
            let n = a.len().min(b.len());
            let (a, b) = (&a[..n], &b[..n]);
            if let Ok(x) = wilcoxon_signed_rank(a, b) {
                let y = wilcoxon_signed_rank(b, a).unwrap();
                prop_assert_eq!(x.outcome.p_value, y.outcome.p_value);
                prop_assert_eq!(x.w_plus, y.w_minus);
                prop_assert_eq!(x.w_minus, y.w_plus);
            }
        }
    }
}
