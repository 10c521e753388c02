use super::FeatureError;

/// Classic DTW with absolute-difference local cost and unit steps
/// (insertion, deletion, match). No warping band.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64, FeatureError> {
    if a.is_empty() || b.is_empty() {
        return Err(FeatureError::EmptySequence);
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &ai in a {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let cost = (ai - b[j - 1]).abs();
            cur[j] = cost + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Z-score standardization; a constant series maps to zeros.
pub fn standardize(series: &[f64]) -> Vec<f64> {
    let n = series.len() as f64;
    if series.is_empty() {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        series.iter().map(|v| (v - mean) / sd).collect()
    } else {
        vec![0.0; series.len()]
    }
}

/// Mean-pools a series into at most `max_points` values using chunks of
/// `ceil(len / max_points)` consecutive samples.
pub fn decimate(series: &[f64], max_points: usize) -> Vec<f64> {
    if series.len() <= max_points || max_points == 0 {
        return series.to_vec();
    }
    let chunk = series.len().div_ceil(max_points);
    series.chunks(chunk).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

/// DTW between two window series after standardization and decimation.
pub fn window_dtw(a: &[f64], b: &[f64], max_points: usize) -> Result<f64, FeatureError> {
    dtw_distance(&decimate(&standardize(a), max_points), &decimate(&standardize(b), max_points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
        let c = (a[i] - b[j]).abs();
        match (i, j) {
            (0, 0) => c,
            (0, _) => c + naive(a, b, 0, j - 1),
            (_, 0) => c + naive(a, b, i - 1, 0),
            _ => c + naive(a, b, i - 1, j).min(naive(a, b, i, j - 1)).min(naive(a, b, i - 1, j - 1)),
        }
    }

    #[test]
    fn small_case() {
        assert_eq!(dtw_distance(&[0.0, 1.0, 2.0], &[0.0, 2.0]).unwrap(), 1.0);
        assert_eq!(naive(&[0.0, 1.0, 2.0], &[0.0, 2.0], 2, 1), 1.0);
        assert_eq!(dtw_distance(&[], &[1.0]).unwrap_err(), FeatureError::EmptySequence);
    }

    #[test]
    fn decimation_bounds_length() {
        let s: Vec<f64> = (0..401).map(f64::from).collect();
        let d = decimate(&s, 200);
        assert!(d.len() <= 200);
        assert_eq!(d[0], 1.0);
        assert_eq!(decimate(&s[..150], 200).len(), 150);
    }

    proptest! {
        #[test]
        fn matches_naive_recursion(a in proptest::collection::vec(-4i32..5, 1..8), b in proptest::collection::vec(-4i32..5, 1..8)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let d = dtw_distance(&a, &b).unwrap();
            prop_assert_eq!(d, naive(&a, &b, a.len() - 1, b.len() - 1));
            prop_assert_eq!(d, dtw_distance(&b, &a).unwrap());
            prop_assert!(d >= 0.0);
            prop_assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
        }
    }
}
