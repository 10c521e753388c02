//! Accelerometer traces and their CSV representation.
//!
//! A trace file is UTF-8 CSV with the header `t_ms,x,y,z,screen_on`, one row per
//! sample, LF line endings and `.` as decimal separator. `screen_on` is `0`/`1`
//! (`true`/`false` are accepted on input). Timestamps are milliseconds since the
//! start of the trace and must be non-decreasing; equal timestamps collapse to
//! the last row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRACE_HEADER: &str = "t_ms,x,y,z,screen_on";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace file not found: {0}")]
    FileNotFound(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("timestamps decrease at line {0}")]
    NonMonotonicTime(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelSample {
    pub t_ms: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub screen_on: bool,
}

impl AccelSample {
    pub fn new(t_ms: u64, x: f64, y: f64, z: f64, screen_on: bool) -> Self {
        Self { t_ms, x, y, z, screen_on }
    }
}

/// One user's samples, strictly increasing in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelTrace {
    pub user_id: String,
    samples: Vec<AccelSample>,
    /// Informational only; windowing is time-based.
    pub nominal_rate_hz: f64,
    /// Rows dropped because a later row repeated their timestamp.
    pub duplicates_collapsed: usize,
}

impl AccelTrace {
    /// Builds a trace from samples that already satisfy the ordering invariant.
    ///
    /// Returns `EmptyTrace` for no samples and `NonMonotonicTime(i)` (0-based
    /// sample index) when timestamps are not strictly increasing or a value is
    /// not finite.
    pub fn from_samples(user_id: impl Into<String>, samples: Vec<AccelSample>) -> Result<Self, TraceError> {
        if samples.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.x.is_finite() && s.y.is_finite() && s.z.is_finite()) {
                return Err(TraceError::MalformedRow(i));
            }
            if i > 0 && samples[i - 1].t_ms >= s.t_ms {
                return Err(TraceError::NonMonotonicTime(i));
            }
        }
        let nominal_rate_hz = estimate_rate(&samples);
        Ok(Self { user_id: user_id.into(), samples, nominal_rate_hz, duplicates_collapsed: 0 })
    }

    pub fn samples(&self) -> &[AccelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Span from first to last timestamp.
    pub fn duration_ms(&self) -> u64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_ms - a.t_ms,
            _ => 0,
        }
    }

    /// Sum of inter-sample intervals no longer than `max_gap_ms`, i.e. the time
    /// actually covered by data once removed regions are excluded.
    pub fn covered_duration_ms(&self, max_gap_ms: u64) -> u64 {
        covered_duration_ms(&self.samples, max_gap_ms)
    }
}

pub fn covered_duration_ms(samples: &[AccelSample], max_gap_ms: u64) -> u64 {
    samples
        .windows(2)
        .map(|w| w[1].t_ms - w[0].t_ms)
        .filter(|&d| d <= max_gap_ms)
        .sum()
}

fn estimate_rate(samples: &[AccelSample]) -> f64 {
    let span = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => b.t_ms - a.t_ms,
        _ => 0,
    };
    if samples.len() < 2 || span == 0 {
        1.0
    } else {
        (samples.len() - 1) as f64 * 1000.0 / span as f64
    }
}

fn parse_bool(field: &str) -> Option<bool> {
    match field {
        "1" | "true" | "TRUE" | "True" => Some(true),
        "0" | "false" | "FALSE" | "False" => Some(false),
        _ => None,
    }
}

fn parse_row(line: &str) -> Option<AccelSample> {
    let mut it = line.split(',').map(str::trim);
    let t_ms = it.next()?.parse::<u64>().ok()?;
    let mut axis = || it.next().and_then(|f| f.parse::<f64>().ok()).filter(|v| v.is_finite());
    let x = axis()?;
    let y = axis()?;
    let z = axis()?;
    let screen_on = parse_bool(it.next()?)?;
    if it.next().is_some() {
        return None;
    }
    Some(AccelSample { t_ms, x, y, z, screen_on })
}

/// Parses trace CSV text. Line numbers in errors are 1-based and count the header.
pub fn parse_trace(user_id: &str, text: &str) -> Result<AccelTrace, TraceError> {
    let mut samples: Vec<AccelSample> = Vec::new();
    let mut duplicates = 0usize;
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if normalized == TRACE_HEADER {
                continue;
            }
            // Headerless files are accepted; fall through and parse as data.
        }
        let sample = parse_row(line).ok_or(TraceError::MalformedRow(line_no))?;
        match samples.last_mut() {
            Some(prev) if sample.t_ms < prev.t_ms => return Err(TraceError::NonMonotonicTime(line_no)),
            Some(prev) if sample.t_ms == prev.t_ms => {
                *prev = sample;
                duplicates += 1;
            }
            _ => samples.push(sample),
        }
    }
    if samples.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let nominal_rate_hz = estimate_rate(&samples);
    Ok(AccelTrace { user_id: user_id.to_string(), samples, nominal_rate_hz, duplicates_collapsed: duplicates })
}

/// Loads a trace; the user id is the file stem.
pub fn load_trace(path: &Path) -> Result<AccelTrace, TraceError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => TraceError::FileNotFound(display.clone()),
        _ => TraceError::Io { path: display.clone(), source: e },
    })?;
    let user_id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("unknown");
    let trace = parse_trace(user_id, &text)?;
    if trace.duplicates_collapsed > 0 {
        log::warn!("{}: collapsed {} duplicate timestamps", display, trace.duplicates_collapsed);
    }
    Ok(trace)
}

pub fn format_trace(trace: &AccelTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 40);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in trace.samples() {
        let _ = writeln!(out, "{},{},{},{},{}", s.t_ms, s.x, s.y, s.z, u8::from(s.screen_on));
    }
    out
}

pub fn save_trace(trace: &AccelTrace, path: &Path) -> Result<(), TraceError> {
    fs::write(path, format_trace(trace))
        .map_err(|source| TraceError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_rows() {
        let t = parse_trace("u", "t_ms,x,y,z,screen_on\n0,0,0,9.8,1\n50,0,0,9.8,1\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.duration_ms(), 50);
        assert!(t.samples()[0].screen_on);
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(matches!(parse_trace("u", ""), Err(TraceError::EmptyTrace)));
        assert!(matches!(parse_trace("u", "t_ms,x,y,z,screen_on\n"), Err(TraceError::EmptyTrace)));
    }

    #[test]
    fn decreasing_time_reports_line() {
        let err = parse_trace("u", "t_ms,x,y,z,screen_on\n100,0,0,0,0\n50,0,0,0,0\n").unwrap_err();
        assert!(matches!(err, TraceError::NonMonotonicTime(3)));
    }

    #[test]
    fn malformed_rows_reject_whole_file() {
        for bad in ["0,a,0,0,1", "0,0,0,0", "0,0,0,0,2", "0,NaN,0,0,1", "-5,0,0,0,1", "0,0,0,0,1,9"] {
            let text = format!("t_ms,x,y,z,screen_on\n{bad}\n");
            assert!(matches!(parse_trace("u", &text), Err(TraceError::MalformedRow(2))), "{bad}");
        }
    }

    #[test]
    fn duplicates_collapse_to_last() {
        let t = parse_trace("u", "t_ms,x,y,z,screen_on\n0,1,0,0,0\n0,2,0,0,1\n10,3,0,0,0\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.duplicates_collapsed, 1);
        assert_eq!(t.samples()[0].x, 2.0);
    }

    #[test]
    fn missing_file() {
        let err = load_trace(Path::new("/nonexistent/trace.csv")).unwrap_err();
        assert!(matches!(err, TraceError::FileNotFound(_)));
    }

    #[test]
    fn format_round_trips() {
        let samples = vec![
            AccelSample::new(0, 0.1, -0.25, 1.0 / 3.0, true),
            AccelSample::new(48, 1e-17, 2.5, -9.80665, false),
        ];
        let t = AccelTrace::from_samples("u", samples).unwrap();
        let back = parse_trace("u", &format_trace(&t)).unwrap();
        assert_eq!(back.samples(), t.samples());
    }

    #[test]
    fn covered_duration_skips_gaps() {
        let samples = vec![
            AccelSample::new(0, 0.0, 0.0, 0.0, false),
            AccelSample::new(100, 0.0, 0.0, 0.0, false),
            AccelSample::new(10_000, 0.0, 0.0, 0.0, false),
            AccelSample::new(10_100, 0.0, 0.0, 0.0, false),
        ];
        assert_eq!(covered_duration_ms(&samples, 2500), 200);
    }
}
