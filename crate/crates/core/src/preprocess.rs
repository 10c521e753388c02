//! Unattended-segment removal and median filtering.
//!
//! The trace is cut into fixed wall-clock segments (2.5 s by default). A segment
//! whose per-axis medians all fall strictly inside the unattended boxes is a
//! phone lying still and is dropped; everything else is kept with its original
//! timestamps. Removal runs before median filtering, and both run before windowing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{AccelSample, AccelTrace};

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("every segment of the trace was unattended")]
    EmptyAfterFilter,
    #[error("median filter span must be odd and positive, got {0}")]
    InvalidSpan(usize),
    #[error("invalid unattended thresholds: {0}")]
    InvalidThresholds(&'static str),
}

/// Open intervals per axis; a segment is unattended when all three medians lie inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnattendedThresholds {
    pub lx: f64,
    pub ux: f64,
    pub ly: f64,
    pub uy: f64,
    pub lz: f64,
    pub uz: f64,
    pub segment_len_ms: u64,
}

impl Default for UnattendedThresholds {
    fn default() -> Self {
        Self { lx: -0.036, ux: 0.035, ly: -0.02, uy: 0.06, lz: -0.22, uz: -0.13, segment_len_ms: 2500 }
    }
}

impl UnattendedThresholds {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let finite = [self.lx, self.ux, self.ly, self.uy, self.lz, self.uz].iter().all(|v| v.is_finite());
        if !finite {
            return Err(PreprocessError::InvalidThresholds("bounds must be finite"));
        }
        if !(self.lx < self.ux && self.ly < self.uy && self.lz < self.uz) {
            return Err(PreprocessError::InvalidThresholds("lower bound must be below upper bound"));
        }
        if self.segment_len_ms == 0 {
            return Err(PreprocessError::InvalidThresholds("segment_len_ms must be positive"));
        }
        Ok(())
    }

    pub fn is_unattended(&self, m: SegmentMedians) -> bool {
        (self.lx < m.mx && m.mx < self.ux) && (self.ly < m.my && m.my < self.uy) && (self.lz < m.mz && m.mz < self.uz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMedians {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl SegmentMedians {
    pub fn of(samples: &[AccelSample]) -> Self {
        let mut buf: Vec<f64> = Vec::with_capacity(samples.len());
        let mut axis = |f: fn(&AccelSample) -> f64| {
            buf.clear();
            buf.extend(samples.iter().map(f));
            median_in_place(&mut buf)
        };
        Self { mx: axis(|s| s.x), my: axis(|s| s.y), mz: axis(|s| s.z) }
    }
}

/// Median of a non-empty slice; even lengths average the two middle values.
pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    debug_assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn compute_magnitude(x: f64, y: f64, z: f64) -> f64 {
    (x * x + y * y + z * z).sqrt()
}

/// Splits samples into consecutive runs sharing the segment index
/// `(t - t_first) / segment_len_ms`. The trailing run may be partial.
pub fn segments(samples: &[AccelSample], segment_len_ms: u64) -> Vec<&[AccelSample]> {
    let Some(first) = samples.first() else { return Vec::new() };
    let origin = first.t_ms;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=samples.len() {
        let boundary = i == samples.len()
            || (samples[i].t_ms - origin) / segment_len_ms != (samples[start].t_ms - origin) / segment_len_ms;
        if boundary {
            out.push(&samples[start..i]);
            start = i;
        }
    }
    out
}

pub fn remove_unattended(trace: &AccelTrace, th: &UnattendedThresholds) -> Result<AccelTrace, PreprocessError> {
    th.validate()?;
    let kept: Vec<AccelSample> = segments(trace.samples(), th.segment_len_ms)
        .into_iter()
        .filter(|seg| !th.is_unattended(SegmentMedians::of(seg)))
        .flat_map(|seg| seg.iter().copied())
        .collect();
    if kept.is_empty() {
        return Err(PreprocessError::EmptyAfterFilter);
    }
    let mut out = AccelTrace::from_samples(trace.user_id.clone(), kept).expect("subset of a valid trace is valid");
    out.nominal_rate_hz = trace.nominal_rate_hz;
    Ok(out)
}

/// Running median of odd `span` applied to one series; the first and last
/// `span / 2` values pass through unchanged.
pub fn median_filter_series(series: &[f64], span: usize) -> Result<Vec<f64>, PreprocessError> {
    if span == 0 || span.is_multiple_of(2) {
        return Err(PreprocessError::InvalidSpan(span));
    }
    let half = span / 2;
    let mut out = series.to_vec();
    if series.len() < span {
        return Ok(out);
    }
    let mut buf = vec![0.0; span];
    for i in half..series.len() - half {
        buf.copy_from_slice(&series[i - half..=i + half]);
        out[i] = median_in_place(&mut buf);
    }
    Ok(out)
}

pub fn median_filter(trace: &AccelTrace, span: usize) -> Result<AccelTrace, PreprocessError> {
    let s = trace.samples();
    let xs = median_filter_series(&s.iter().map(|a| a.x).collect::<Vec<_>>(), span)?;
    let ys = median_filter_series(&s.iter().map(|a| a.y).collect::<Vec<_>>(), span)?;
    let zs = median_filter_series(&s.iter().map(|a| a.z).collect::<Vec<_>>(), span)?;
    let samples = s
        .iter()
        .enumerate()
        .map(|(i, a)| AccelSample { x: xs[i], y: ys[i], z: zs[i], ..*a })
        .collect();
    let mut out = AccelTrace::from_samples(trace.user_id.clone(), samples).expect("timestamps unchanged");
    out.nominal_rate_hz = trace.nominal_rate_hz;
    Ok(out)
}

/// Unattended removal followed by median filtering.
pub fn preprocess(trace: &AccelTrace, th: &UnattendedThresholds, span: usize) -> Result<AccelTrace, PreprocessError> {
    let attended = remove_unattended(trace, th)?;
    median_filter(&attended, span)
}
