//! End-to-end orchestration shared by the CLI subcommands.
//!
//! Per-user work runs on a bounded rayon pool. Every job derives its seed from
//! the master seed and the user id, and results are collected in user-id
//! order, so outputs do not depend on the number of workers.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::eval::{
    aggregate, enroll_from_features, failure_to_enroll, impostor_pools, split_chronological, verify_and_score, EvalResult,
    FteReport, PopulationSummary,
};
use crate::features::{trace_features, WindowFeatures};
use crate::preprocess::preprocess;
use crate::profile::{load_profile, save_profile, ProfileError, UserProfile};
use crate::report::{clusters_csv, features_csv, results_csv, skipped_csv, Manifest, RunDir, SkippedUser};
use crate::rng::derive_str;
use crate::stats::{compare_classifiers, ComparisonReport, StatsError};
use crate::synth::{generate_population_with, generate_trace, save_ground_truth, SynthError, SynthUserSpec};
use crate::trace::{load_trace, save_trace, AccelTrace, TraceError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{0}")]
    Failed(String),
}

impl PipelineError {
    /// Validation problems (bad config or input) as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, PipelineError::Config(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.display().to_string(), source }
}

/// Runs `f` on a pool of `jobs` threads (0 = rayon's default).
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| PipelineError::Failed(e.to_string()))?;
    Ok(pool.install(f))
}

/// One user's feature windows, sorted by start time.
#[derive(Debug, Clone, PartialEq)]
pub struct UserWindows {
    pub user_id: String,
    pub windows: Vec<WindowFeatures>,
}

/// Loads every `*.csv` trace in `dir` (ground-truth sidecars `*_truth.csv`
/// are ignored), sorted by file name.
pub fn load_trace_dir(dir: &Path) -> Result<Vec<AccelTrace>, PipelineError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .filter(|p| !p.file_stem().is_some_and(|s| s.to_string_lossy().ends_with("_truth")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(PipelineError::Failed(format!("no trace CSV files in {}", dir.display())));
    }
    paths.par_iter().map(|p| load_trace(p).map_err(PipelineError::from)).collect()
}

pub fn population_specs(cfg: &RunConfig) -> Result<Vec<SynthUserSpec>, PipelineError> {
    let p = &cfg.population;
    Ok(generate_population_with(p.n_users, p.distinctiveness, derive_str(cfg.run.seed, "population"), &p.params())?)
}

/// Traces from `population.trace_dir`, or a synthetic population otherwise.
pub fn obtain_traces(cfg: &RunConfig) -> Result<Vec<AccelTrace>, PipelineError> {
    match &cfg.population.trace_dir {
        Some(dir) => load_trace_dir(dir),
        None => population_specs(cfg)?
            .par_iter()
            .map(|s| generate_trace(s).map(|(t, _)| t).map_err(PipelineError::from))
            .collect(),
    }
}

/// Writes each synthetic user's trace and ground truth into `dir`.
pub fn write_population(specs: &[SynthUserSpec], dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    specs
        .par_iter()
        .map(|s| {
            let (trace, truth) = generate_trace(s)?;
            let path = dir.join(format!("{}.csv", s.user_id));
            save_trace(&trace, &path)?;
            let truth_path = dir.join(format!("{}_truth.csv", s.user_id));
            save_ground_truth(&truth, &truth_path).map_err(io_err(&truth_path))?;
            Ok(path)
        })
        .collect()
}

/// Preprocesses and windows each trace; users whose traces fail are skipped.
pub fn featurize_all(traces: &[AccelTrace], cfg: &RunConfig) -> (Vec<UserWindows>, Vec<SkippedUser>) {
    let outcomes: Vec<Result<UserWindows, SkippedUser>> = traces
        .par_iter()
        .map(|t| {
            let skip = |reason: String| SkippedUser { user_id: t.user_id.clone(), stage: "features".into(), reason };
            let clean = preprocess(t, &cfg.preprocess.thresholds, cfg.preprocess.median_span).map_err(|e| skip(e.to_string()))?;
            let windows = trace_features(&clean, &cfg.windows).map_err(|e| skip(e.to_string()))?;
            Ok(UserWindows { user_id: t.user_id.clone(), windows })
        })
        .collect();
    partition(outcomes)
}

fn partition<T>(outcomes: Vec<Result<T, SkippedUser>>) -> (Vec<T>, Vec<SkippedUser>) {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(s) => {
                log::warn!("skipping {} at {}: {}", s.user_id, s.stage, s.reason);
                skipped.push(s);
            }
        }
    }
    (ok, skipped)
}

fn find<'a>(users: &'a [UserWindows], id: &str) -> Option<&'a UserWindows> {
    users.iter().find(|u| u.user_id == id)
}

/// Enrolls every user against the training halves of their impostor training pool.
pub fn enroll_all(users: &[UserWindows], cfg: &RunConfig) -> (Vec<UserProfile>, Vec<SkippedUser>) {
    let ecfg = cfg.enroll_config();
    let ids: Vec<String> = users.iter().map(|u| u.user_id.clone()).collect();
    let win_ms = cfg.windows.win_ms;
    let train_halves: Vec<Vec<WindowFeatures>> =
        users.iter().map(|u| split_chronological(&u.windows, win_ms).0.into_iter().cloned().collect()).collect();
    let outcomes = users
        .par_iter()
        .map(|u| {
            let pools = impostor_pools(&ids, &u.user_id, cfg.run.seed);
            let impostors: Vec<(&str, &[WindowFeatures])> = pools
                .training
                .iter()
                .filter_map(|id| ids.iter().position(|x| x == id))
                .map(|i| (ids[i].as_str(), train_halves[i].as_slice()))
                .collect();
            let seed = derive_str(cfg.run.seed, &format!("enroll/{}", u.user_id));
            enroll_from_features(&u.user_id, &u.windows, &impostors, &cfg.run.algorithms, &ecfg, seed).map_err(|e| SkippedUser {
                user_id: u.user_id.clone(),
                stage: "enroll".into(),
                reason: e.to_string(),
            })
        })
        .collect();
    partition(outcomes)
}

/// Scores each profile's owner test half and the test halves of every user
/// outside the profile's impostor training pool. When no such user exists,
/// all other users are scored and results are flagged as reusing impostors.
pub fn evaluate_all(profiles: &[UserProfile], users: &[UserWindows], cfg: &RunConfig) -> (Vec<EvalResult>, Vec<SkippedUser>) {
    let win_ms = cfg.windows.win_ms;
    let outcomes: Vec<Result<Vec<EvalResult>, SkippedUser>> = profiles
        .par_iter()
        .map(|p| {
            let skip = |reason: String| SkippedUser { user_id: p.user_id.clone(), stage: "evaluate".into(), reason };
            let own = find(users, &p.user_id).ok_or_else(|| skip("no trace for profile owner".into()))?;
            let (_, own_test) = split_chronological(&own.windows, win_ms);
            let others: Vec<&UserWindows> = users.iter().filter(|u| u.user_id != p.user_id).collect();
            let mut testing: Vec<&UserWindows> =
                others.iter().copied().filter(|u| !p.impostor_training_users.contains(&u.user_id)).collect();
            let reused = testing.is_empty();
            if reused {
                testing = others;
            }
            let impostor_test: Vec<&WindowFeatures> =
                testing.iter().flat_map(|u| split_chronological(&u.windows, win_ms).1).collect();
            let results = verify_and_score(p, &own_test, &impostor_test, reused).map_err(|e| skip(e.to_string()))?;
            if results.is_empty() {
                return Err(skip("no context received both genuine and impostor test windows".into()));
            }
            Ok(results)
        })
        .collect();
    let (nested, skipped) = partition(outcomes);
    (nested.into_iter().flatten().collect(), skipped)
}

pub fn save_profiles(profiles: &[UserProfile], dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for p in profiles {
        save_profile(p, &dir.join(format!("{}.json", p.user_id)))?;
    }
    Ok(())
}

pub fn load_profiles(dir: &Path) -> Result<Vec<UserProfile>, PipelineError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        out.push(load_profile(&p)?);
    }
    out.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    Ok(out)
}

/// Reads a summary written as `summary.csv` or `summary.json`.
pub fn load_summary(path: &Path) -> Result<PopulationSummary, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| PipelineError::Failed(format!("{}: {e}", path.display())))
    } else {
        PopulationSummary::from_csv(&text).map_err(|e| PipelineError::Failed(format!("{}: {e}", path.display())))
    }
}

fn written(dir: &RunDir, name: &str, contents: impl AsRef<[u8]>, outputs: &mut Vec<String>) -> Result<(), PipelineError> {
    let p = dir.write(name, contents).map_err(io_err(&dir.file(name)))?;
    outputs.push(p.strip_prefix(&dir.path).unwrap_or(&p).display().to_string());
    Ok(())
}

fn written_json<T: serde::Serialize>(dir: &RunDir, name: &str, v: &T, outputs: &mut Vec<String>) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| PipelineError::Failed(e.to_string()))? + "\n";
    written(dir, name, text, outputs)
}

pub fn write_results(dir: &RunDir, results: &[EvalResult], summary: &PopulationSummary, outputs: &mut Vec<String>) -> Result<(), PipelineError> {
    written(dir, "results.csv", results_csv(results), outputs)?;
    written_json(dir, "results.json", &results, outputs)?;
    written(dir, "summary.csv", summary.to_csv(), outputs)?;
    written_json(dir, "summary.json", summary, outputs)?;
    written(dir, "population.csv", summary.population_csv(), outputs)
}

pub fn write_comparison(dir: &RunDir, report: &ComparisonReport, outputs: &mut Vec<String>) -> Result<(), PipelineError> {
    written(dir, "comparison.csv", report.to_csv(), outputs)?;
    written_json(dir, "comparison.json", report, outputs)
}

pub fn write_fte(dir: &RunDir, report: &FteReport, outputs: &mut Vec<String>) -> Result<(), PipelineError> {
    written(dir, "fte_summary.csv", report.to_csv(), outputs)?;
    written_json(dir, "fte.json", report, outputs)?;
    for level in &report.levels {
        let pct = (level.fraction * 100.0).round() as u32;
        for (j, alg) in report.algorithms.iter().enumerate() {
            written(dir, &format!("fte_cdf_{pct:02}_{alg}.csv"), level.cdf_csv(j), outputs)?;
        }
    }
    Ok(())
}

pub fn write_manifest(dir: &RunDir, manifest: &mut Manifest) -> Result<PathBuf, PipelineError> {
    manifest.outputs.push("manifest.json".into());
    let p = dir.write_json("manifest.json", manifest).map_err(io_err(&dir.file("manifest.json")))?;
    Ok(p)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub results: Vec<EvalResult>,
    pub summary: PopulationSummary,
    pub comparison: Option<ComparisonReport>,
    pub fte: FteReport,
    pub skipped: Vec<SkippedUser>,
}

/// Full pipeline into a fresh run directory under `out_dir`.
pub fn run_all(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome, PipelineError> {
    cfg.validate()?;
    let dir = RunDir::create(out_dir, cfg.run.seed).map_err(io_err(out_dir))?;
    let mut manifest = Manifest::new("run-all", cfg);
    let mut outputs = Vec::new();
    written(&dir, "config.toml", cfg.to_toml(), &mut outputs)?;

    let (results, summary, comparison, fte, profiles, skipped, users) = with_pool(cfg.run.jobs, || -> Result<_, PipelineError> {
        let mut traces = obtain_traces(cfg)?;
        traces.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        let (users, mut skipped) = featurize_all(&traces, cfg);
        drop(traces);
        let (profiles, s) = enroll_all(&users, cfg);
        skipped.extend(s);
        let (results, s) = evaluate_all(&profiles, &users, cfg);
        skipped.extend(s);
        let summary = aggregate(&results).map_err(|e| PipelineError::Failed(format!("no user could be evaluated: {e}")))?;
        let comparison = compare_classifiers(&summary.algorithms.iter().map(|a| a.to_string()).collect::<Vec<_>>(), &summary.eer_matrix())
            .map_err(|e| log::warn!("classifier comparison skipped: {e}"))
            .ok();
        let fte = failure_to_enroll(&summary, &cfg.eval.fte_fractions, cfg.eval.fte_ranking);
        Ok((results, summary, comparison, fte, profiles, skipped, users))
    })??;

    write_results(&dir, &results, &summary, &mut outputs)?;
    if let Some(c) = &comparison {
        write_comparison(&dir, c, &mut outputs)?;
    }
    write_fte(&dir, &fte, &mut outputs)?;
    written(&dir, "clusters.csv", clusters_csv(&profiles), &mut outputs)?;
    written(&dir, "skipped.csv", skipped_csv(&skipped), &mut outputs)?;
    if cfg.run.save_profiles {
        save_profiles(&profiles, &dir.file("profiles"))?;
        outputs.push("profiles/".into());
    }
    if cfg.run.export_features {
        let all: Vec<WindowFeatures> = users.iter().flat_map(|u| u.windows.iter().cloned()).collect();
        written(&dir, "features.csv", features_csv(&all), &mut outputs)?;
    }
    manifest.users = users.iter().map(|u| u.user_id.clone()).collect();
    manifest.skipped = skipped.clone();
    manifest.outputs = outputs;
    write_manifest(&dir, &mut manifest)?;
    Ok(RunOutcome { run_dir: dir.path, results, summary, comparison, fte, skipped })
}
