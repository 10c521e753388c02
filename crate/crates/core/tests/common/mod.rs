#![allow(dead_code)]

use ctxauth::pipeline::{featurize_all, obtain_traces, UserWindows};
use ctxauth::{Algorithm, RunConfig};

/// Small synthetic population config that keeps test runtimes short.
pub fn small_config(n_users: usize, n_contexts: usize, distinctiveness: f64, attended_ms: u64, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.run.seed = seed;
    cfg.run.jobs = 1;
    cfg.population.n_users = n_users;
    cfg.population.n_contexts = n_contexts;
    cfg.population.distinctiveness = distinctiveness;
    cfg.population.attended_duration_ms = attended_ms;
    cfg
}

pub fn user_windows(cfg: &RunConfig) -> Vec<UserWindows> {
    let traces = obtain_traces(cfg).unwrap();
    let (users, skipped) = featurize_all(&traces, cfg);
    assert!(skipped.is_empty(), "{skipped:?}");
    users
}

pub const FAST: [Algorithm; 2] = [Algorithm::LogReg, Algorithm::Rf];
