//! Enrollment, continuous verification and EER-based evaluation.

mod eer;
mod enroll;
mod summary;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::Algorithm;
use crate::features::WindowFeatures;

pub use eer::{compute_eer, Eer};
pub use enroll::{enroll_from_features, enroll_user, EnrollConfig};
pub use summary::{aggregate, failure_to_enroll, AlgorithmStats, CdfPoint, FteLevel, FteRanking, FteReport, PopulationSummary, UserRow};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("empty score list")]
    EmptyScores,
    #[error("enrollment failed: {0}")]
    EnrollmentFailure(String),
    #[error("no test samples for context {0}")]
    NoTestSamples(usize),
    #[error("test window starting at {0} ms was used for training")]
    Leakage(u64),
    #[error("no evaluation results")]
    NoResults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub user_id: String,
    pub context: usize,
    pub algorithm: Algorithm,
    pub genuine_scores: Vec<f64>,
    pub impostor_scores: Vec<f64>,
    pub eer: f64,
    pub threshold: f64,
    /// Impostor test users overlap the impostors seen in training.
    pub reused_impostors: bool,
}

/// Chronological split into training and test halves.
///
/// The first `n/2` windows train; the rest test, minus any test window that
/// overlaps the last training window in time.
pub fn split_chronological(windows: &[WindowFeatures], win_ms: u64) -> (Vec<&WindowFeatures>, Vec<&WindowFeatures>) {
    let mut sorted: Vec<&WindowFeatures> = windows.iter().collect();
    sorted.sort_by_key(|w| w.start_ms);
    let half = sorted.len() / 2;
    let test_from = sorted[..half].last().map_or(0, |w| w.start_ms + win_ms);
    let test = sorted[half..].iter().copied().filter(|w| w.start_ms >= test_from).collect();
    sorted.truncate(half);
    (sorted, test)
}

/// Impostor users for one candidate: those used in training and those scored at test time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpostorPools {
    pub training: Vec<String>,
    pub testing: Vec<String>,
    pub reused: bool,
}

/// Splits the other users into disjoint training and test pools (seeded
/// shuffle, training gets the larger half). With fewer than two other users
/// both pools hold everyone and `reused` is set.
pub fn impostor_pools(user_ids: &[String], candidate: &str, seed: u64) -> ImpostorPools {
    use rand::seq::SliceRandom;
    let mut others: Vec<String> = user_ids.iter().filter(|u| u.as_str() != candidate).cloned().collect();
    others.sort();
    others.dedup();
    if others.len() < 2 {
        return ImpostorPools { training: others.clone(), testing: others, reused: true };
    }
    others.shuffle(&mut crate::rng::seeded(crate::rng::derive_str(seed, candidate)));
    let testing = others.split_off(others.len().div_ceil(2));
    ImpostorPools { training: others, testing, reused: false }
}

/// Scores the candidate's and the impostors' test windows through the profile
/// and computes one EER per (context, algorithm).
///
/// Contexts that receive no genuine or no impostor test windows are omitted.
pub fn verify_and_score(
    profile: &crate::profile::UserProfile,
    candidate_test: &[&WindowFeatures],
    impostor_test: &[&WindowFeatures],
    reused_impostors: bool,
) -> Result<Vec<EvalResult>, EvalError> {
    use std::collections::BTreeMap;
    let trained: std::collections::HashSet<u64> = profile.train_window_starts.iter().copied().collect();
    if let Some(w) = candidate_test.iter().find(|w| trained.contains(&w.start_ms)) {
        return Err(EvalError::Leakage(w.start_ms));
    }
    let algorithms = profile.algorithms();
    // (context, algorithm index) -> (genuine, impostor)
    let mut lists: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (windows, genuine) in [(candidate_test, true), (impostor_test, false)] {
        for w in windows {
            let Ok(v) = profile.normalize(&w.values) else { continue };
            let ctx = profile.route(&v);
            let Some(cp) = profile.context(ctx) else { continue };
            for (ai, m) in cp.models.iter().enumerate() {
                let Ok(s) = m.score(&v) else { continue };
                let e = lists.entry((ctx, ai)).or_default();
                if genuine {
                    e.0.push(s);
                } else {
                    e.1.push(s);
                }
            }
        }
    }
    let mut out = Vec::new();
    for cp in &profile.contexts {
        for (ai, &alg) in algorithms.iter().enumerate() {
            let Some((g, im)) = lists.remove(&(cp.context, ai)) else {
                log::debug!("{}: {}", profile.user_id, EvalError::NoTestSamples(cp.context));
                continue;
            };
            let Ok(e) = compute_eer(&g, &im) else {
                log::debug!("{}: {}", profile.user_id, EvalError::NoTestSamples(cp.context));
                continue;
            };
            out.push(EvalResult {
                user_id: profile.user_id.clone(),
                context: cp.context,
                algorithm: alg,
                genuine_scores: g,
                impostor_scores: im,
                eer: e.eer,
                threshold: e.threshold,
                reused_impostors,
            });
        }
    }
    Ok(out)
}
