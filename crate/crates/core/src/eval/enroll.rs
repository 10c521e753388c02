use serde::{Deserialize, Serialize};

use super::{split_chronological, EvalError};
use crate::classifiers::{Algorithm, AuthModel, ClassifierParams, ForestParams, LabeledDataset};
use crate::context::{kmeans, prune_clusters, select_routed, ContextModel, KMeansParams, PruneParams};
use crate::features::{cfs_select, ks_normality_screen, trace_features, CfsParams, MinMaxNormalizer, WindowConfig, WindowFeatures};
use crate::preprocess::{preprocess, UnattendedThresholds};
use crate::profile::{ContextProfile, UnevaluableContext, UserProfile, SCHEMA_VERSION};
use crate::rng::derive_str;
use crate::trace::AccelTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnrollConfig {
    pub thresholds: UnattendedThresholds,
    pub median_span: usize,
    pub window: WindowConfig,
    pub kmeans: KMeansParams,
    pub prune: PruneParams,
    pub cim: ForestParams,
    pub cfs: CfsParams,
    pub classifiers: ClassifierParams,
    /// Impostor windows per context; `None` matches the genuine training count.
    pub impostor_cap: Option<usize>,
    pub min_impostor_matches: usize,
    pub min_windows: usize,
    pub ks_alpha: f64,
}

impl Default for EnrollConfig {
    fn default() -> Self {
        Self {
            thresholds: UnattendedThresholds::default(),
            median_span: 3,
            window: WindowConfig::default(),
            kmeans: KMeansParams::default(),
            prune: PruneParams::default(),
            cim: ForestParams::default(),
            cfs: CfsParams::default(),
            classifiers: ClassifierParams::default(),
            impostor_cap: None,
            min_impostor_matches: 10,
            min_windows: 20,
            ks_alpha: 0.05,
        }
    }
}

fn featurize(trace: &AccelTrace, cfg: &EnrollConfig) -> Result<Vec<WindowFeatures>, EvalError> {
    let clean = preprocess(trace, &cfg.thresholds, cfg.median_span)
        .map_err(|e| EvalError::EnrollmentFailure(format!("{}: {e}", trace.user_id)))?;
    trace_features(&clean, &cfg.window).map_err(|e| EvalError::EnrollmentFailure(format!("{}: {e}", trace.user_id)))
}

/// Enrolls a candidate from raw traces: preprocesses and featurizes every
/// trace, uses the training half of each impostor, then delegates to
/// [`enroll_from_features`].
pub fn enroll_user(
    candidate: &AccelTrace,
    impostors: &[AccelTrace],
    algorithms: &[Algorithm],
    cfg: &EnrollConfig,
    seed: u64,
) -> Result<UserProfile, EvalError> {
    let own = featurize(candidate, cfg)?;
    let mut others = Vec::with_capacity(impostors.len());
    for t in impostors {
        let w = featurize(t, cfg)?;
        let train: Vec<WindowFeatures> = split_chronological(&w, cfg.window.win_ms).0.into_iter().cloned().collect();
        others.push((t.user_id.clone(), train));
    }
    let refs: Vec<(&str, &[WindowFeatures])> = others.iter().map(|(u, w)| (u.as_str(), w.as_slice())).collect();
    enroll_from_features(&candidate.user_id, &own, &refs, algorithms, cfg, seed)
}

/// Enrolls a candidate from all of their windows and the impostor training
/// windows, one `(user_id, windows)` entry per impostor user.
pub fn enroll_from_features(
    user_id: &str,
    windows: &[WindowFeatures],
    impostors: &[(&str, &[WindowFeatures])],
    algorithms: &[Algorithm],
    cfg: &EnrollConfig,
    seed: u64,
) -> Result<UserProfile, EvalError> {
    let fail = |reason: String| EvalError::EnrollmentFailure(format!("{user_id}: {reason}"));
    if windows.len() < cfg.min_windows {
        return Err(fail(format!("{} windows, need {}", windows.len(), cfg.min_windows)));
    }
    if algorithms.is_empty() {
        return Err(fail("no algorithms requested".into()));
    }
    let (train, _) = split_chronological(windows, cfg.window.win_ms);
    let raw: Vec<&[f64]> = train.iter().map(|w| w.values.as_slice()).collect();
    let normalizer = MinMaxNormalizer::fit(&raw);
    let normed: Vec<Vec<f64>> = raw.iter().map(|v| normalizer.apply(v)).collect();
    let dim = normalizer.dim();

    let columns: Vec<Vec<f64>> = (0..dim).map(|j| normed.iter().map(|v| v[j]).collect()).collect();
    let rejected = ks_normality_screen(&columns, cfg.ks_alpha);
    let ks_rejection_fraction = rejected.iter().filter(|&&r| r).count() as f64 / dim.max(1) as f64;

    let clustering = kmeans(&normed, &cfg.kmeans, derive_str(seed, "kmeans")).map_err(|e| fail(e.to_string()))?;
    let counts = clustering.counts();
    let retained = prune_clusters(&counts, &cfg.prune);
    let cim = ContextModel::train(user_id, &normed, &clustering.assignments, &retained, &cfg.cim, derive_str(seed, "cim"));

    let mut imp_vectors = Vec::new();
    let mut owners = Vec::new();
    let mut impostor_training_users = Vec::new();
    for (u, (name, ws)) in impostors.iter().enumerate() {
        impostor_training_users.push(name.to_string());
        for w in ws.iter().filter(|w| w.values.len() == dim) {
            imp_vectors.push(normalizer.apply(&w.values));
            owners.push(u);
        }
    }
    let routed: Vec<usize> = imp_vectors.iter().map(|v| cim.predict_context(v)).collect();

    let mut contexts = Vec::new();
    let mut unevaluable = Vec::new();
    for &ctx in &retained {
        let genuine: Vec<&Vec<f64>> =
            normed.iter().zip(&clustering.assignments).filter(|(_, &a)| a == ctx).map(|(v, _)| v).collect();
        let cap = cfg.impostor_cap.unwrap_or(genuine.len());
        let picked = match select_routed(&routed, &owners, ctx, cap, cfg.min_impostor_matches, derive_str(seed, &format!("impostors/{ctx}"))) {
            Ok(p) => p,
            Err(e) => {
                unevaluable.push(UnevaluableContext { context: ctx, reason: e.to_string() });
                continue;
            }
        };
        let mut vectors: Vec<&Vec<f64>> = genuine.clone();
        vectors.extend(picked.iter().map(|&i| &imp_vectors[i]));
        let labels: Vec<bool> = (0..vectors.len()).map(|i| i < genuine.len()).collect();
        let subset = match cfs_select(&vectors, &labels, &cfg.cfs) {
            Ok(s) => s,
            Err(e) => {
                unevaluable.push(UnevaluableContext { context: ctx, reason: e.to_string() });
                continue;
            }
        };
        let projected: Vec<Vec<f64>> = vectors.iter().map(|v| subset.project(v)).collect();
        let dataset = LabeledDataset::new(projected, labels).map_err(|e| fail(e.to_string()))?;
        let mut models = Vec::with_capacity(algorithms.len());
        for &alg in algorithms {
            let s = derive_str(seed, &format!("model/{ctx}/{alg}"));
            models.push(AuthModel::train(alg, &dataset, subset.indices.clone(), &cfg.classifiers, s).map_err(|e| fail(e.to_string()))?);
        }
        contexts.push(ContextProfile { context: ctx, subset, n_genuine: genuine.len(), n_impostor: picked.len(), models });
    }
    if contexts.is_empty() {
        return Err(fail("no evaluable context".into()));
    }
    Ok(UserProfile {
        schema_version: SCHEMA_VERSION,
        user_id: user_id.to_string(),
        seed,
        window: cfg.window,
        normalizer,
        centroids: clustering.centroids,
        cluster_counts: counts,
        retained,
        cim,
        contexts,
        unevaluable,
        train_window_starts: train.iter().map(|w| w.start_ms).collect(),
        impostor_training_users,
        ks_rejection_fraction,
    })
}
