/// Mean, population standard deviation, IQR, range, energy and peak-to-RMS ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptive {
    pub mean: f64,
    pub std: f64,
    pub iqr: f64,
    pub range: f64,
    pub energy: f64,
    pub peak_to_rms: f64,
}

/// Quantile by linear interpolation between order statistics at `(n-1)p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn descriptive_features(series: &[f64]) -> Descriptive {
    assert!(!series.is_empty(), "descriptive features need at least one value");
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let std = (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let range = sorted[sorted.len() - 1] - sorted[0];
    let energy = series.iter().map(|v| v * v).sum::<f64>() / n;
    let rms = energy.sqrt();
    let peak = series.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let peak_to_rms = if rms > 0.0 { peak / rms } else { 0.0 };
    Descriptive { mean, std, iqr, range, energy, peak_to_rms }
}

/// Bin index in `[0, bins)` for equal-width bins over `[min, max]`; the maximum
/// lands in the last bin and a degenerate range maps everything to bin 0.
pub(crate) fn bin_index(v: f64, min: f64, max: f64, bins: usize) -> usize {
    let width = max - min;
    if !(width > 0.0) {
        return 0;
    }
    (((v - min) / width * bins as f64).floor() as usize).min(bins - 1)
}

pub fn histogram16(series: &[f64]) -> [f64; 16] {
    assert!(!series.is_empty(), "histogram needs at least one value");
    let (min, max) = min_max(series);
    let mut h = [0.0; 16];
    for &v in series {
        h[bin_index(v, min, max, 16)] += 1.0;
    }
    let n = series.len() as f64;
    h.iter_mut().for_each(|c| *c /= n);
    h
}

pub(crate) fn min_max(series: &[f64]) -> (f64, f64) {
    series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
