use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctxauth::classifiers::Algorithm;
use ctxauth::config::{ConfigError, RunConfig};
use ctxauth::eval::{aggregate, failure_to_enroll};
use ctxauth::pipeline::{
    enroll_all, evaluate_all, featurize_all, load_profiles, load_summary, load_trace_dir, population_specs, run_all,
    save_profiles, with_pool, write_comparison, write_fte, write_manifest, write_population, write_results,
    PipelineError,
};
use ctxauth::report::{skipped_csv, Manifest, RunDir};
use ctxauth::stats::compare_classifiers;

/// Context-aware continuous authentication on accelerometer traces.
#[derive(Parser, Debug)]
#[command(name = "ctxauth", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML config file, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parent directory for the run directory.
    #[arg(long, global = true, default_value = "runs")]
    out_dir: PathBuf,
    /// Comma-separated algorithms, e.g. RF,SVM (overrides run.algorithms).
    #[arg(long, global = true, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Worker threads; 0 uses every core (overrides run.jobs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic population of traces with ground-truth sidecars.
    Synth {
        #[arg(long)]
        users: Option<usize>,
        #[arg(long)]
        distinctiveness: Option<f64>,
    },
    /// Enroll every user found in a trace directory.
    Enroll {
        #[arg(long)]
        traces: PathBuf,
    },
    /// Score test windows through saved profiles and compute EERs.
    Evaluate {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        traces: PathBuf,
    },
    /// Pairwise classifier comparison from a summary file.
    Compare {
        #[arg(long)]
        summary: PathBuf,
    },
    /// Failure-to-enroll analysis from a summary file.
    Fte {
        #[arg(long)]
        summary: PathBuf,
        /// Comma-separated removal fractions (overrides eval.fte_fractions).
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
    },
    /// Full pipeline: traces, enrollment, evaluation, comparison and FTE.
    RunAll,
}

fn resolve_config(common: &Common) -> Result<RunConfig, PipelineError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(a) = &common.algorithms {
        cfg.run.algorithms = a.clone();
    }
    if let Some(j) = common.jobs {
        cfg.run.jobs = j;
    }
    Ok(cfg)
}

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.display().to_string(), source }
}

fn finish(dir: &RunDir, mut manifest: Manifest, outputs: Vec<String>) -> Result<(), PipelineError> {
    manifest.outputs = outputs;
    write_manifest(dir, &mut manifest)?;
    println!("{}", dir.path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut cfg = resolve_config(&cli.common)?;
    let name = match &cli.command {
        Command::Synth { users, distinctiveness } => {
            if let Some(n) = users {
                cfg.population.n_users = *n;
            }
            if let Some(d) = distinctiveness {
                cfg.population.distinctiveness = *d;
            }
            "synth"
        }
        Command::Enroll { .. } => "enroll",
        Command::Evaluate { .. } => "evaluate",
        Command::Compare { .. } => "compare",
        Command::Fte { fractions, .. } => {
            if let Some(f) = fractions {
                cfg.eval.fte_fractions = f.clone();
            }
            "fte"
        }
        Command::RunAll => "run-all",
    };
    cfg.validate()?;

    if let Command::RunAll = cli.command {
        let outcome = run_all(&cfg, &cli.common.out_dir)?;
        for s in &outcome.skipped {
            eprintln!("skipped {} ({}): {}", s.user_id, s.stage, s.reason);
        }
        for s in &outcome.summary.population {
            eprintln!("{:<6} mean EER {:.4} (std {:.4}, {} users)", s.algorithm, s.mean, s.std, s.n_users);
        }
        println!("{}", outcome.run_dir.display());
        return Ok(());
    }

    let dir = RunDir::create(&cli.common.out_dir, cfg.run.seed).map_err(io_failure(&cli.common.out_dir))?;
    let mut manifest = Manifest::new(name, &cfg);
    let mut outputs = Vec::new();
    match cli.command {
        Command::Synth { .. } => {
            let specs = population_specs(&cfg)?;
            let traces = dir.file("traces");
            std::fs::create_dir_all(&traces).map_err(io_failure(&traces))?;
            with_pool(cfg.run.jobs, || write_population(&specs, &traces))??;
            dir.write_json("population.json", &specs).map_err(io_failure(&dir.file("population.json")))?;
            manifest.users = specs.iter().map(|s| s.user_id.clone()).collect();
            outputs.extend(["traces/".to_string(), "population.json".to_string()]);
        }
        Command::Enroll { traces } => {
            let (profiles, skipped, users) = with_pool(cfg.run.jobs, || -> Result<_, PipelineError> {
                let traces = load_trace_dir(&traces)?;
                let (users, mut skipped) = featurize_all(&traces, &cfg);
                let (profiles, s) = enroll_all(&users, &cfg);
                skipped.extend(s);
                Ok((profiles, skipped, users.into_iter().map(|u| u.user_id).collect::<Vec<_>>()))
            })??;
            if profiles.is_empty() {
                return Err(PipelineError::Failed("no user could be enrolled".into()));
            }
            save_profiles(&profiles, &dir.file("profiles"))?;
            dir.write("skipped.csv", skipped_csv(&skipped)).map_err(io_failure(&dir.file("skipped.csv")))?;
            manifest.users = users;
            manifest.skipped = skipped;
            outputs.extend(["profiles/".to_string(), "skipped.csv".to_string()]);
        }
        Command::Evaluate { profiles, traces } => {
            let (results, skipped, users) = with_pool(cfg.run.jobs, || -> Result<_, PipelineError> {
                let profiles = load_profiles(&profiles)?;
                let traces = load_trace_dir(&traces)?;
                let (users, mut skipped) = featurize_all(&traces, &cfg);
                let (results, s) = evaluate_all(&profiles, &users, &cfg);
                skipped.extend(s);
                Ok((results, skipped, users.into_iter().map(|u| u.user_id).collect::<Vec<_>>()))
            })??;
            let summary = aggregate(&results).map_err(|e| PipelineError::Failed(format!("nothing evaluated: {e}")))?;
            write_results(&dir, &results, &summary, &mut outputs)?;
            dir.write("skipped.csv", skipped_csv(&skipped)).map_err(io_failure(&dir.file("skipped.csv")))?;
            outputs.push("skipped.csv".into());
            manifest.users = users;
            manifest.skipped = skipped;
        }
        Command::Compare { summary } => {
            let s = load_summary(&summary)?;
            let names: Vec<String> = s.algorithms.iter().map(|a| a.to_string()).collect();
            let report = compare_classifiers(&names, &s.eer_matrix())?;
            write_comparison(&dir, &report, &mut outputs)?;
            manifest.users = s.users.iter().map(|u| u.user_id.clone()).collect();
        }
        Command::Fte { summary, .. } => {
            let s = load_summary(&summary)?;
            if s.users.len() < 2 {
                return Err(PipelineError::Failed("failure-to-enroll analysis needs at least 2 users".into()));
            }
            write_fte(&dir, &failure_to_enroll(&s, &cfg.eval.fte_fractions, cfg.eval.fte_ranking), &mut outputs)?;
            manifest.users = s.users.iter().map(|u| u.user_id.clone()).collect();
        }
        Command::RunAll => unreachable!("handled above"),
    }
    finish(&dir, manifest, outputs)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let PipelineError::Config(ConfigError::Invalid { key, .. }) = &e {
                eprintln!("offending key: {key}");
            }
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
