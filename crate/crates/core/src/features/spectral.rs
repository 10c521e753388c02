use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FeatureError;

/// One-sided power spectrum of a mean-removed, zero-padded series.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub freqs: Vec<f64>,
    /// `powers[k]` for `k = 0..=N/2`; interior bins carry both the positive and
    /// negative frequency halves so the total equals the time-domain energy.
    pub powers: Vec<f64>,
    /// Padded transform length.
    pub n_fft: usize,
}

impl PowerSpectrum {
    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    pub fn nyquist(&self) -> f64 {
        self.freqs.last().copied().unwrap_or(0.0)
    }
}

/// Forward DFT of `series` zero-padded to `n_fft` (which must be ≥ the series length).
pub fn fft_padded(series: &[f64], n_fft: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n_fft, Complex::new(0.0, 0.0));
    if n_fft > 0 {
        FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    }
    buf
}

pub fn power_spectrum(series: &[f64], duration_ms: u64) -> Result<PowerSpectrum, FeatureError> {
    if series.len() < 8 {
        return Err(FeatureError::TooFewSamples(series.len()));
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let n_fft = series.len().next_power_of_two();
    let spectrum = fft_padded(&centered, n_fft);
    let fs = series.len() as f64 * 1000.0 / duration_ms as f64;
    let half = n_fft / 2;
    let scale = 1.0 / n_fft as f64;
    let powers = (0..=half)
        .map(|k| {
            let p = spectrum[k].norm_sqr() * scale;
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let freqs = (0..=half).map(|k| k as f64 * fs / n_fft as f64).collect();
    Ok(PowerSpectrum { freqs, powers, n_fft })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFeatures {
    pub band_power: f64,
    pub median_frequency: f64,
    pub spectral_entropy: f64,
}

/// Band power, median frequency and normalized spectral entropy over the
/// one-sided band excluding DC. A spectrum with no power maps to all zeros.
pub fn spectral_features(series: &[f64], duration_ms: u64) -> Result<SpectralFeatures, FeatureError> {
    let spec = power_spectrum(series, duration_ms)?;
    let band = &spec.powers[1..];
    let freqs = &spec.freqs[1..];
    let total: f64 = band.iter().sum();
    let energy: f64 = series.iter().map(|v| v * v).sum();
    if !(total > 1e-24 * energy.max(1.0)) {
        return Ok(SpectralFeatures { band_power: 0.0, median_frequency: 0.0, spectral_entropy: 0.0 });
    }
    let band_power = total / band.len() as f64;

    let half_total = 0.5 * total;
    let mut acc = 0.0;
    let mut median_frequency = *freqs.last().unwrap();
    for (f, p) in freqs.iter().zip(band) {
        acc += p;
        if acc >= half_total {
            median_frequency = *f;
            break;
        }
    }

    let spectral_entropy = if band.len() > 1 {
        let h: f64 = band
            .iter()
            .map(|p| p / total)
            .filter(|&q| q > 0.0)
            .map(|q| -q * q.ln())
            .sum();
        (h / (band.len() as f64).ln()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(SpectralFeatures { band_power, median_frequency, spectral_entropy })
}
