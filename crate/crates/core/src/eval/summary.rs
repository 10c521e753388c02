use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalResult};
use crate::classifiers::Algorithm;

/// Mean EER over one user's evaluated contexts, per algorithm (column order of
/// [`PopulationSummary::algorithms`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRow {
    pub user_id: String,
    pub eers: Vec<f64>,
    pub n_contexts: usize,
}

impl UserRow {
    pub fn mean_over_algorithms(&self) -> f64 {
        self.eers.iter().sum::<f64>() / self.eers.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmStats {
    pub algorithm: Algorithm,
    pub mean: f64,
    /// Sample standard deviation over users (0 for a single user).
    pub std: f64,
    pub n_users: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub algorithms: Vec<Algorithm>,
    /// Sorted by user id.
    pub users: Vec<UserRow>,
    pub population: Vec<AlgorithmStats>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, std)
}

impl PopulationSummary {
    /// Builds a summary from per-user rows, recomputing the population statistics.
    pub fn from_rows(algorithms: Vec<Algorithm>, mut users: Vec<UserRow>) -> Result<Self, EvalError> {
        if users.is_empty() || algorithms.is_empty() {
            return Err(EvalError::NoResults);
        }
        users.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        let population = algorithms
            .iter()
            .enumerate()
            .map(|(j, &algorithm)| {
                let col: Vec<f64> = users.iter().map(|u| u.eers[j]).collect();
                let (mean, std) = mean_std(&col);
                AlgorithmStats { algorithm, mean, std, n_users: col.len() }
            })
            .collect();
        Ok(Self { algorithms, users, population })
    }

    /// Users × algorithms matrix of mean EERs.
    pub fn eer_matrix(&self) -> Vec<Vec<f64>> {
        self.users.iter().map(|u| u.eers.clone()).collect()
    }

    pub fn stats(&self, algorithm: Algorithm) -> Option<&AlgorithmStats> {
        self.population.iter().find(|s| s.algorithm == algorithm)
    }

    /// `user_id,<ALG>...` with one row per user.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user_id");
        for a in &self.algorithms {
            out.push(',');
            out.push_str(a.as_str());
        }
        out.push('\n');
        for u in &self.users {
            out.push_str(&u.user_id);
            for e in &u.eers {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }

    /// `algorithm,mean_eer,std_eer,n_users`.
    pub fn population_csv(&self) -> String {
        let mut out = String::from("algorithm,mean_eer,std_eer,n_users\n");
        for s in &self.population {
            out.push_str(&format!("{},{},{},{}\n", s.algorithm, s.mean, s.std, s.n_users));
        }
        out
    }

    /// Parses the output of [`PopulationSummary::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or("empty summary")?;
        let mut cols = header.split(',');
        if cols.next().map(str::trim) != Some("user_id") {
            return Err("summary header must start with user_id".into());
        }
        let algorithms = cols.map(|c| c.parse::<Algorithm>().map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
        let mut users = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut f = line.split(',');
            let user_id = f.next().unwrap_or_default().trim().to_string();
            let eers = f
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad EER on summary line {}", i + 2)))
                .collect::<Result<Vec<_>, _>>()?;
            if eers.len() != algorithms.len() {
                return Err(format!("summary line {} has {} values, expected {}", i + 2, eers.len(), algorithms.len()));
            }
            users.push(UserRow { user_id, eers, n_contexts: 0 });
        }
        Self::from_rows(algorithms, users).map_err(|e| e.to_string())
    }
}

/// User-level EER per algorithm is the unweighted mean over that user's
/// evaluated contexts; population mean/std are taken over users.
///
/// Users missing any algorithm present elsewhere are dropped with a warning.
pub fn aggregate(results: &[EvalResult]) -> Result<PopulationSummary, EvalError> {
    let mut algorithms: Vec<Algorithm> = results.iter().map(|r| r.algorithm).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut per_user: BTreeMap<&str, BTreeMap<Algorithm, Vec<f64>>> = BTreeMap::new();
    for r in results {
        per_user.entry(&r.user_id).or_default().entry(r.algorithm).or_default().push(r.eer);
    }
    let mut users = Vec::new();
    for (user, by_alg) in per_user {
        if by_alg.len() != algorithms.len() {
            log::warn!("{user}: results missing for some algorithms; user left out of the summary");
            continue;
        }
        let eers = algorithms.iter().map(|a| mean_std(&by_alg[a]).0).collect();
        let n_contexts = by_alg.values().map(Vec::len).max().unwrap_or(0);
        users.push(UserRow { user_id: user.to_string(), eers, n_contexts });
    }
    PopulationSummary::from_rows(algorithms, users)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub eer: f64,
    pub cumulative_fraction: f64,
}

/// How "bad" users are chosen for removal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FteRanking {
    /// Each algorithm drops its own worst users, so no algorithm's mean can rise
    /// as the removal fraction grows.
    #[default]
    PerAlgorithm,
    /// One ranking by EER averaged over algorithms, shared by every algorithm.
    MeanOverAlgorithms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FteLevel {
    pub fraction: f64,
    pub n_removed: usize,
    /// Removed user ids per algorithm, same order as [`FteReport::algorithms`].
    pub removed: Vec<Vec<String>>,
    pub population: Vec<AlgorithmStats>,
    /// Empirical CDF of the remaining user EERs, per algorithm.
    pub cdfs: Vec<Vec<CdfPoint>>,
}

impl FteLevel {
    pub fn cdf_csv(&self, algorithm_index: usize) -> String {
        let mut out = String::from("eer,cumulative_fraction\n");
        for p in &self.cdfs[algorithm_index] {
            out.push_str(&format!("{},{}\n", p.eer, p.cumulative_fraction));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FteReport {
    pub ranking: FteRanking,
    pub algorithms: Vec<Algorithm>,
    pub levels: Vec<FteLevel>,
}

impl FteReport {
    /// `fraction,n_removed,algorithm,mean_eer,std_eer,n_users`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,n_removed,algorithm,mean_eer,std_eer,n_users\n");
        for l in &self.levels {
            for s in &l.population {
                out.push_str(&format!("{},{},{},{},{},{}\n", l.fraction, l.n_removed, s.algorithm, s.mean, s.std, s.n_users));
            }
        }
        out
    }
}

fn cdf(values: &[f64]) -> Vec<CdfPoint> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().map(|(i, &eer)| CdfPoint { eer, cumulative_fraction: (i + 1) as f64 / n }).collect()
}

/// Number of users removed for a fraction; at least one user always remains.
pub(crate) fn removal_count(fraction: f64, n: usize) -> usize {
    let raw = (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
    raw.min(n.saturating_sub(1))
}

/// Users worst-first by `key` (ties: later user id first).
fn rank_by(users: &[UserRow], key: impl Fn(&UserRow) -> f64) -> Vec<&UserRow> {
    let mut ranked: Vec<&UserRow> = users.iter().collect();
    ranked.sort_by(|a, b| key(b).total_cmp(&key(a)).then_with(|| b.user_id.cmp(&a.user_id)));
    ranked
}

/// Removes the worst `ceil(fraction * N)` users and recomputes population
/// statistics and per-algorithm EER CDFs on the rest. A level for fraction 0
/// is always included first.
pub fn failure_to_enroll(summary: &PopulationSummary, fractions: &[f64], ranking: FteRanking) -> FteReport {
    let n_alg = summary.algorithms.len();
    let orders: Vec<Vec<&UserRow>> = match ranking {
        FteRanking::PerAlgorithm => (0..n_alg).map(|j| rank_by(&summary.users, |u| u.eers[j])).collect(),
        FteRanking::MeanOverAlgorithms => vec![rank_by(&summary.users, UserRow::mean_over_algorithms); n_alg],
    };
    let mut all = vec![0.0];
    all.extend(fractions.iter().copied().filter(|&f| f > 0.0));
    let levels = all
        .into_iter()
        .map(|fraction| {
            let k = removal_count(fraction, summary.users.len());
            let mut removed = Vec::with_capacity(n_alg);
            let mut population = Vec::with_capacity(n_alg);
            let mut cdfs = Vec::with_capacity(n_alg);
            for (j, order) in orders.iter().enumerate() {
                let col: Vec<f64> = order[k..].iter().map(|u| u.eers[j]).collect();
                let (mean, std) = mean_std(&col);
                population.push(AlgorithmStats { algorithm: summary.algorithms[j], mean, std, n_users: col.len() });
                cdfs.push(cdf(&col));
                let mut gone: Vec<String> = order[..k].iter().map(|u| u.user_id.clone()).collect();
                gone.sort();
                removed.push(gone);
            }
            FteLevel { fraction, n_removed: k, removed, population, cdfs }
        })
        .collect();
    FteReport { ranking, algorithms: summary.algorithms.clone(), levels }
}
