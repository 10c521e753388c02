use std::io::Write;

use ctxauth::trace::{format_trace, load_trace, parse_trace, save_trace, TraceError};
use ctxauth::{AccelSample, AccelTrace};
use proptest::prelude::*;

fn write_tmp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn two_row_trace() {
    let f = write_tmp("t_ms,x,y,z,screen_on\n0,0,0,9.8,1\n50,0,0,9.8,1\n");
    let t = load_trace(f.path()).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.duration_ms(), 50);
    assert!(t.samples().iter().all(|s| s.screen_on && s.z == 9.8));
}

#[test]
fn empty_file_is_rejected() {
    let f = write_tmp("");
    assert!(matches!(load_trace(f.path()), Err(TraceError::EmptyTrace)));
    let f = write_tmp("t_ms,x,y,z,screen_on\n");
    assert!(matches!(load_trace(f.path()), Err(TraceError::EmptyTrace)));
}

#[test]
fn decreasing_time_reports_the_line() {
    let f = write_tmp("t_ms,x,y,z,screen_on\n100,0,0,1,0\n50,0,0,1,0\n");
    assert!(matches!(load_trace(f.path()), Err(TraceError::NonMonotonicTime(3))));
}

#[test]
fn malformed_rows_and_missing_files() {
    let f = write_tmp("t_ms,x,y,z,screen_on\n0,0,0,1,0\n50,zero,0,1,0\n");
    assert!(matches!(load_trace(f.path()), Err(TraceError::MalformedRow(3))));
    let f = write_tmp("t_ms,x,y,z,screen_on\n0,0,0,1\n");
    assert!(matches!(load_trace(f.path()), Err(TraceError::MalformedRow(2))));
    assert!(matches!(load_trace(std::path::Path::new("/nonexistent/u.csv")), Err(TraceError::FileNotFound(_))));
}

#[test]
fn duplicate_timestamps_keep_the_last_row() {
    let t = parse_trace("u", "t_ms,x,y,z,screen_on\n0,1,0,0,0\n0,2,0,0,1\n10,3,0,0,0\n").unwrap();
    assert_eq!(t.duplicates_collapsed, 1);
    assert_eq!(t.samples()[0].x, 2.0);
    assert!(t.samples()[0].screen_on);
}

#[test]
fn save_then_load_is_identity() {
    let samples = (0..50).map(|i| AccelSample::new(i * 47, 0.1 * i as f64, -0.3, 1.0 / (i + 1) as f64, i % 3 == 0)).collect();
    let trace = AccelTrace::from_samples("alice", samples).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alice.csv");
    save_trace(&trace, &path).unwrap();
    let back = load_trace(&path).unwrap();
    assert_eq!(back.user_id, "alice");
    assert_eq!(back.samples(), trace.samples());
}

proptest! {
    #[test]
    fn accepted_files_have_strictly_increasing_time(
        rows in proptest::collection::vec((0u64..500, -20.0f64..20.0, any::<bool>()), 1..60)
    ) {
        let mut text = String::from("t_ms,x,y,z,screen_on\n");
        for (t, v, s) in &rows {
            text.push_str(&format!("{t},{v},{v},{v},{}\n", *s as u8));
        }
        if let Ok(trace) = parse_trace("p", &text) {
            prop_assert!(trace.samples().windows(2).all(|w| w[0].t_ms < w[1].t_ms));
            let again = parse_trace("p", &format_trace(&trace)).unwrap();
            prop_assert_eq!(again.samples(), trace.samples());
        }
    }
}
