use serde::{Deserialize, Serialize};

use crate::preprocess::compute_magnitude;
use crate::trace::{AccelSample, AccelTrace};

/// Windowing parameters. Validity gates drop windows that are too sparse or
/// that straddle a removed region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub win_ms: u64,
    pub step_ms: u64,
    pub min_samples: usize,
    pub max_gap_ms: u64,
    pub dtw_max_points: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { win_ms: 10_000, step_ms: 5_000, min_samples: 8, max_gap_ms: 2_500, dtw_max_points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub user_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub m: Vec<f64>,
    pub screen: Vec<bool>,
}

impl Window {
    pub fn from_samples(user_id: &str, start_ms: u64, end_ms: u64, samples: &[AccelSample]) -> Self {
        Self {
            user_id: user_id.to_string(),
            start_ms,
            end_ms,
            x: samples.iter().map(|s| s.x).collect(),
            y: samples.iter().map(|s| s.y).collect(),
            z: samples.iter().map(|s| s.z).collect(),
            m: samples.iter().map(|s| compute_magnitude(s.x, s.y, s.z)).collect(),
            screen: samples.iter().map(|s| s.screen_on).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

/// Median spacing between consecutive samples; 0 for fewer than two samples.
fn typical_interval(samples: &[AccelSample]) -> u64 {
    let mut d: Vec<u64> = samples.windows(2).map(|w| w[1].t_ms - w[0].t_ms).collect();
    if d.is_empty() {
        return 0;
    }
    let mid = d.len() / 2;
    *d.select_nth_unstable(mid).1
}

fn gaps_ok(samples: &[AccelSample], start_ms: u64, end_ms: u64, max_gap_ms: u64) -> bool {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else { return false };
    first.t_ms - start_ms <= max_gap_ms
        && end_ms - last.t_ms <= max_gap_ms
        && samples.windows(2).all(|w| w[1].t_ms - w[0].t_ms <= max_gap_ms)
}

/// Slices a preprocessed trace into windows `[k*step, k*step + win)` on the
/// trace's own time axis.
///
/// The trace is taken to end one typical sample interval after its last
/// timestamp; windows reaching past that are partial and dropped, as are
/// windows with fewer than `min_samples` samples or any gap (including to the
/// window edges) above `max_gap_ms`.
pub fn window_trace(trace: &AccelTrace, cfg: &WindowConfig) -> Vec<Window> {
    let samples = trace.samples();
    let Some(last) = samples.last() else { return Vec::new() };
    let trace_end = last.t_ms + typical_interval(samples);
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let start = k * cfg.step_ms;
        let end = start + cfg.win_ms;
        if end > trace_end {
            break;
        }
        let lo = samples.partition_point(|s| s.t_ms < start);
        let hi = samples.partition_point(|s| s.t_ms < end);
        let slice = &samples[lo..hi];
        if slice.len() >= cfg.min_samples && gaps_ok(slice, start, end, cfg.max_gap_ms) {
            out.push(Window::from_samples(&trace.user_id, start, end, slice));
        }
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regular(duration_ms: u64, dt: u64) -> AccelTrace {
        let samples = (0..duration_ms / dt)
            .map(|i| AccelSample::new(i * dt, (i as f64).sin(), 0.0, 1.0, i % 2 == 0))
            .collect();
        AccelTrace::from_samples("u", samples).unwrap()
    }

    #[test]
    fn window_counts() {
        let cfg = WindowConfig::default();
        let w = window_trace(&regular(25_000, 50), &cfg);
        assert_eq!(w.iter().map(|w| w.start_ms).collect::<Vec<_>>(), vec![0, 5_000, 10_000, 15_000]);
        assert_eq!(window_trace(&regular(9_000, 50), &cfg).len(), 0);
        assert_eq!(window_trace(&regular(10_000, 50), &cfg).len(), 1);
    }

    #[test]
    fn windows_straddling_gaps_are_dropped() {
        let mut samples: Vec<_> = (0..200).map(|i| AccelSample::new(i * 50, 0.0, 0.0, 1.0, false)).collect();
        samples.extend((0..400).map(|i| AccelSample::new(20_000 + i * 50, 0.0, 0.0, 1.0, false)));
        let trace = AccelTrace::from_samples("u", samples).unwrap();
        let starts: Vec<u64> = window_trace(&trace, &WindowConfig::default()).iter().map(|w| w.start_ms).collect();
        assert_eq!(starts, vec![0, 20_000, 25_000, 30_000]);
    }

    #[test]
    fn sparse_windows_are_dropped() {
        let trace = regular(20_000, 2_000);
        assert!(window_trace(&trace, &WindowConfig::default()).is_empty());
    }
}
