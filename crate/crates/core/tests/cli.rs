use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "[run]\nalgorithms = [\"LOGREG\", \"RF\"]\njobs = 2\n\n[context]\nk = 3\n\n[population]\nn_users = 4\nattended_duration_ms = 1200000\n";

fn ctxauth(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxauth")).args(args).current_dir(cwd).output().unwrap()
}

fn run_dir(out: &Output) -> PathBuf {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    PathBuf::from(String::from_utf8(out.stdout.clone()).unwrap().trim())
}

#[test]
fn zero_clusters_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "[context]\nk = 0\n").unwrap();
    let out = ctxauth(&["run-all", "--config", "bad.toml", "--out-dir", "runs"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("context.k"));
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn usage_errors_and_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(ctxauth(&["run-all", "--bogus"], tmp.path()).status.code(), Some(1));
    assert_eq!(ctxauth(&["--help"], tmp.path()).status.code(), Some(0));
    std::fs::write(tmp.path().join("typo.toml"), "[context]\nkk = 3\n").unwrap();
    assert_eq!(ctxauth(&["run-all", "--config", "typo.toml"], tmp.path()).status.code(), Some(1));
    assert_eq!(ctxauth(&["run-all", "--algorithms", "RF,XGB"], tmp.path()).status.code(), Some(1));
}

#[test]
fn missing_inputs_are_runtime_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ctxauth(&["compare", "--summary", "absent.csv", "--out-dir", "runs"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_all_writes_the_report_bundle_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("small.toml"), SMALL).unwrap();
    let a = run_dir(&ctxauth(&["run-all", "--config", "small.toml", "--seed", "4", "--out-dir", "runs"], tmp.path()));
    let b = run_dir(&ctxauth(&["run-all", "--config", "small.toml", "--seed", "4", "--out-dir", "runs", "--jobs", "1"], tmp.path()));
    let (a, b) = (tmp.path().join(a), tmp.path().join(b));
    assert_ne!(a, b);
    assert!(a.file_name().unwrap().to_string_lossy().contains("_seed4"));
    for f in ["manifest.json", "summary.csv", "population.csv", "results.csv", "comparison.csv", "fte_summary.csv", "clusters.csv", "skipped.csv", "config.toml"] {
        assert!(a.join(f).is_file(), "{f} missing");
    }
    assert!(a.join("fte_cdf_05_RF.csv").is_file());
    assert!(a.join("profiles/user00.json").is_file());
    for f in ["summary.csv", "comparison.csv", "results.csv", "fte_summary.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["command"], "run-all");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    // The manifest alone reproduces the run.
    let c = run_dir(&ctxauth(&["run-all", "--config", a.join("manifest.json").to_str().unwrap(), "--out-dir", "runs"], tmp.path()));
    assert_eq!(std::fs::read(a.join("summary.csv")).unwrap(), std::fs::read(tmp.path().join(c).join("summary.csv")).unwrap());
}

#[test]
fn stepwise_subcommands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("small.toml"), SMALL).unwrap();
    let common = ["--config", "small.toml", "--seed", "9"];
    let s = tmp.path().join(run_dir(&ctxauth(&[&["synth", "--out-dir", "s"], &common[..]].concat(), tmp.path())));
    let traces = s.join("traces");
    assert!(traces.join("user03.csv").is_file() && traces.join("user03_truth.csv").is_file());
    let before = std::fs::read(traces.join("user00.csv")).unwrap();

    let tr = traces.to_str().unwrap();
    let e = tmp.path().join(run_dir(&ctxauth(&[&["enroll", "--traces", tr, "--out-dir", "e"], &common[..]].concat(), tmp.path())));
    let profiles = e.join("profiles");
    assert_eq!(std::fs::read_dir(&profiles).unwrap().count(), 4);

    let pr = profiles.to_str().unwrap();
    let v = tmp.path().join(run_dir(&ctxauth(&[&["evaluate", "--profiles", pr, "--traces", tr, "--out-dir", "v"], &common[..]].concat(), tmp.path())));
    let summary = v.join("summary.csv");
    let header = std::fs::read_to_string(&summary).unwrap();
    assert!(header.starts_with("user_id,LOGREG,RF\n"));

    let sm = summary.to_str().unwrap();
    let c = tmp.path().join(run_dir(&ctxauth(&["compare", "--summary", sm, "--out-dir", "c"], tmp.path())));
    let comparison = std::fs::read_to_string(c.join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().count(), 2);
    let f = tmp.path().join(run_dir(&ctxauth(&["fte", "--summary", sm, "--fractions", "0.25", "--out-dir", "f"], tmp.path())));
    assert!(f.join("fte_cdf_25_RF.csv").is_file());

    // Inputs are untouched.
    assert_eq!(std::fs::read(traces.join("user00.csv")).unwrap(), before);
}
