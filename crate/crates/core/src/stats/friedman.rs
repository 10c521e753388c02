use super::special::chi2_sf;
use super::{StatsError, TestMethod, TestOutcome};

/// Ranks with midranks for ties (1-based).
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of tie groups.
pub(crate) fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        out.push(j - i + 1);
        i = j + 1;
    }
    out
}

/// Friedman test on a blocks × treatments matrix (rows are blocks).
pub fn friedman_test(matrix: &[Vec<f64>]) -> Result<TestOutcome, StatsError> {
    let n = matrix.len();
    let k = matrix.first().map_or(0, Vec::len);
    if n < 2 || k < 2 || matrix.iter().any(|r| r.len() != k) {
        return Err(StatsError::DegenerateMatrix { rows: n, cols: k });
    }
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in matrix {
        for (j, r) in midranks(row).into_iter().enumerate() {
            rank_sums[j] += r;
        }
        tie_term += tie_sizes(row).iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
    let statistic = if correction > 1e-12 { (raw / correction).max(0.0) } else { 0.0 };
    let p_value = if statistic > 0.0 { chi2_sf(statistic, kf - 1.0) } else { 1.0 };
    Ok(TestOutcome { method: TestMethod::Friedman, statistic, p_value, n, k: Some(k) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_treatments() {
        let m = vec![vec![5.0; 3], vec![6.0; 3], vec![7.0; 3], vec![8.0; 3]];
        let o = friedman_test(&m).unwrap();
        assert_eq!((o.statistic, o.p_value), (0.0, 1.0));
    }

    #[test]
    fn consistent_ordering() {
        let m = vec![vec![1.0, 2.0, 3.0]; 4];
        let o = friedman_test(&m).unwrap();
        assert!((o.statistic - 8.0).abs() < 1e-12);
        assert!((o.p_value - (-4f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn block_order_is_irrelevant() {
        let m = vec![vec![7.0, 9.0, 8.0], vec![6.0, 5.0, 7.0], vec![9.0, 7.0, 6.0], vec![8.0, 5.0, 6.0]];
        let mut r = m.clone();
        r.reverse();
        assert_eq!(friedman_test(&m).unwrap(), friedman_test(&r).unwrap());
        // Rank sums (9, 7, 8): 12/48·194 − 48 = 0.5.
        assert!((friedman_test(&m).unwrap().statistic - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate() {
        assert!(friedman_test(&[vec![1.0, 2.0]]).is_err());
        assert!(friedman_test(&[vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn midrank_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }
}
