//! Windowing and the 110-component feature vector.
//!
//! Layout (stable; indices are part of the profile format):
//!
//! | range     | content                                                        |
//! |-----------|----------------------------------------------------------------|
//! | 0..25     | axis x block                                                   |
//! | 25..50    | axis y block                                                   |
//! | 50..75    | axis z block                                                   |
//! | 75..100   | magnitude block                                                |
//! | 100..103  | (x, y): DTW distance, mutual information (bits), correlation   |
//! | 103..106  | (x, z): same three                                             |
//! | 106..109  | (y, z): same three                                             |
//! | 109       | fraction of samples with the screen on                         |
//!
//! Each axis block is: mean, std, IQR, range, energy, peak-to-RMS, band power,
//! median frequency, spectral entropy, then 16 histogram fractions.

mod descriptive;
mod dtw;
mod info;
mod normalize;
mod selection;
mod spectral;
mod window;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use descriptive::{descriptive_features, histogram16, quantile_sorted, Descriptive};
pub use dtw::{decimate, dtw_distance, standardize, window_dtw};
pub use info::{correlation, mutual_information};
pub use normalize::MinMaxNormalizer;
pub use selection::{cfs_select, ks_normality_screen, CfsParams, CorrelationTable, FeatureSubset};
pub use spectral::{fft_padded, power_spectrum, spectral_features, PowerSpectrum, SpectralFeatures};
pub use window::{window_trace, Window, WindowConfig};

pub const AXIS_BLOCK: usize = 25;
pub const PAIR_BLOCK: usize = 3;
pub const FEATURE_DIM: usize = 4 * AXIS_BLOCK + 3 * PAIR_BLOCK + 1;
pub const SCREEN_INDEX: usize = FEATURE_DIM - 1;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("need at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("empty sequence")]
    EmptySequence,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("labels contain a single class")]
    DegenerateLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFeatures {
    pub user_id: String,
    pub start_ms: u64,
    pub values: Vec<f64>,
}

/// Component names in layout order, e.g. `x_mean`, `m_hist07`, `xz_dtw`, `screen_on`.
pub fn feature_names() -> Vec<String> {
    const AXIS: [&str; 9] =
        ["mean", "std", "iqr", "range", "energy", "peak_rms", "band_power", "median_freq", "spectral_entropy"];
    let mut names = Vec::with_capacity(FEATURE_DIM);
    for axis in ["x", "y", "z", "m"] {
        names.extend(AXIS.iter().map(|n| format!("{axis}_{n}")));
        names.extend((0..16).map(|b| format!("{axis}_hist{b:02}")));
    }
    for pair in ["xy", "xz", "yz"] {
        names.extend(["dtw", "mi", "corr"].iter().map(|n| format!("{pair}_{n}")));
    }
    names.push("screen_on".into());
    names
}

pub fn screen_on_fraction(window: &Window) -> f64 {
    if window.screen.is_empty() {
        return 0.0;
    }
    window.screen.iter().filter(|&&s| s).count() as f64 / window.screen.len() as f64
}

fn axis_block(series: &[f64], duration_ms: u64, out: &mut Vec<f64>) -> Result<(), FeatureError> {
    let d = descriptive_features(series);
    let s = spectral_features(series, duration_ms)?;
    out.extend([d.mean, d.std, d.iqr, d.range, d.energy, d.peak_to_rms]);
    out.extend([s.band_power, s.median_frequency, s.spectral_entropy]);
    out.extend(histogram16(series));
    Ok(())
}

pub fn extract_features(window: &Window, dtw_max_points: usize) -> Result<WindowFeatures, FeatureError> {
    if window.len() < 8 {
        return Err(FeatureError::TooFewSamples(window.len()));
    }
    let duration = window.duration_ms();
    let mut values = Vec::with_capacity(FEATURE_DIM);
    for series in [&window.x, &window.y, &window.z, &window.m] {
        axis_block(series, duration, &mut values)?;
    }
    for (a, b) in [(&window.x, &window.y), (&window.x, &window.z), (&window.y, &window.z)] {
        values.push(window_dtw(a, b, dtw_max_points)?);
        values.push(mutual_information(a, b)?);
        values.push(correlation(a, b));
    }
    values.push(screen_on_fraction(window));
    debug_assert_eq!(values.len(), FEATURE_DIM);
    Ok(WindowFeatures { user_id: window.user_id.clone(), start_ms: window.start_ms, values })
}

/// Windows a trace and extracts features for every valid window.
pub fn trace_features(trace: &crate::trace::AccelTrace, cfg: &WindowConfig) -> Result<Vec<WindowFeatures>, FeatureError> {
    window_trace(trace, cfg).iter().map(|w| extract_features(w, cfg.dtw_max_points)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_window(seed: u64, n: usize) -> Window {
        let mut rng = crate::rng::seeded(seed);
        let samples: Vec<_> = (0..n)
            .map(|i| {
                crate::trace::AccelSample::new(
                    (i * 10_000 / n) as u64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_bool(0.3),
                )
            })
            .collect();
        Window::from_samples("u", 0, 10_000, &samples)
    }

    #[test]
    fn layout_is_110() {
        assert_eq!(FEATURE_DIM, 110);
        assert_eq!(feature_names().len(), FEATURE_DIM);
        assert_eq!(feature_names()[SCREEN_INDEX], "screen_on");
        assert_eq!(feature_names()[100], "xy_dtw");
    }

    #[test]
    fn shape_and_determinism() {
        let w = random_window(1, 173);
        let a = extract_features(&w, 200).unwrap();
        let b = extract_features(&w.clone(), 200).unwrap();
        assert_eq!(a.values.len(), FEATURE_DIM);
        assert!(a.values.iter().all(|v| v.is_finite()));
        assert_eq!(a, b);
    }

    #[test]
    fn identical_axes() {
        let mut w = random_window(2, 120);
        w.y = w.x.clone();
        let f = extract_features(&w, 200).unwrap();
        assert!((f.values[102] - 1.0).abs() < 1e-12);
        assert_eq!(f.values[100], 0.0);
    }

    #[test]
    fn screen_fraction() {
        let mut w = random_window(3, 8);
        w.screen = vec![true; 8];
        assert_eq!(screen_on_fraction(&w), 1.0);
        w.screen = vec![false; 8];
        assert_eq!(screen_on_fraction(&w), 0.0);
        w.screen = vec![true, true, true, false];
        assert_eq!(screen_on_fraction(&w), 0.75);
    }

    #[test]
    fn spectral_ranges_hold() {
        for seed in 0..20 {
            let w = random_window(100 + seed, 40 + seed as usize * 17);
            let f = extract_features(&w, 200).unwrap();
            let fs = w.len() as f64 / 10.0;
            for block in 0..4 {
                let base = block * AXIS_BLOCK;
                assert!(f.values[base + 6] >= 0.0);
                assert!((0.0..=fs / 2.0 + 1e-9).contains(&f.values[base + 7]));
                assert!((0.0..=1.0).contains(&f.values[base + 8]));
            }
        }
    }
}
