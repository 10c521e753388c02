//! Per-user context discovery and the context identification model (CIM).
//!
//! Training windows are clustered with k-means (k = 8 by default); clusters
//! holding only a handful of windows are pruned, and a Random Forest learns to
//! map a normalized vector to one of the retained cluster ids. Impostor windows
//! are routed through the candidate's CIM so that each context model is trained
//! against impostor data from the same context.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ForestParams, RandomForest};
use crate::rng::seeded;

#[derive(Debug, Error, PartialEq)]
pub enum ContextError {
    #[error("need at least {k} vectors for k-means, got {n}")]
    TooFewVectors { n: usize, k: usize },
    #[error("only {0} impostor windows map to the context")]
    InsufficientImpostors(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self { k: 8, max_iter: 300, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step, ending with the final one.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl Clustering {
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.centroids.len()];
        for &a in &self.assignments {
            c[a] += 1;
        }
        c
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(v: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(j, c)| (j, sq_dist(v, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn plus_plus_init<V: AsRef<[f64]>>(vectors: &[V], k: usize, rng: &mut crate::rng::Rng) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut centroids = vec![vectors[rng.gen_range(0..n)].as_ref().to_vec()];
    let mut d2: Vec<f64> = vectors.iter().map(|v| sq_dist(v.as_ref(), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    chosen = i;
                    break;
                }
                r -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = vectors[pick].as_ref().to_vec();
        for (d, v) in d2.iter_mut().zip(vectors) {
            *d = d.min(sq_dist(v.as_ref(), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's algorithm from k-means++ seeding.
///
/// Stops after `max_iter` updates or once no centroid moves more than `tol`.
/// A cluster left empty by an update is re-seeded at the point farthest from
/// its current centroid.
pub fn kmeans<V: AsRef<[f64]>>(vectors: &[V], params: &KMeansParams, seed: u64) -> Result<Clustering, ContextError> {
    let k = params.k;
    if k == 0 || vectors.len() < k {
        return Err(ContextError::TooFewVectors { n: vectors.len(), k });
    }
    let mut rng = seeded(seed);
    let mut centroids = plus_plus_init(vectors, k, &mut rng);
    let dim = centroids[0].len();
    let mut history = Vec::new();
    let mut iterations = 0;
    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let mut inertia = 0.0;
        let a = vectors
            .iter()
            .map(|v| {
                let (j, d) = nearest(v.as_ref(), centroids);
                inertia += d;
                j
            })
            .collect();
        (a, inertia)
    };
    for _ in 0..params.max_iter {
        iterations += 1;
        let (assignments, inertia) = assign(&centroids);
        history.push(inertia);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (v, &a) in vectors.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(v.as_ref()) {
                *s += x;
            }
        }
        let mut next: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .zip(&centroids)
            .map(|((s, &c), old)| if c > 0 { s.into_iter().map(|x| x / c as f64).collect() } else { old.clone() })
            .collect();
        let mut taken: Vec<usize> = Vec::new();
        for j in (0..k).filter(|&j| counts[j] == 0) {
            let far = vectors
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken.contains(i))
                .map(|(i, v)| (i, sq_dist(v.as_ref(), &next[assignments[i]])))
                .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
                .0;
            taken.push(far);
            next[j] = vectors[far].as_ref().to_vec();
        }
        let shift = next.iter().zip(&centroids).map(|(a, b)| sq_dist(a, b).sqrt()).fold(0.0, f64::max);
        centroids = next;
        if shift < params.tol {
            break;
        }
    }
    let (assignments, inertia) = assign(&centroids);
    history.push(inertia);
    Ok(Clustering { centroids, assignments, inertia, inertia_history: history, iterations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneParams {
    pub min_fraction: f64,
    pub min_count: usize,
}

impl Default for PruneParams {
    fn default() -> Self {
        Self { min_fraction: 0.02, min_count: 30 }
    }
}

/// Ids of clusters with at least `max(min_count, min_fraction * N)` members;
/// never empty (falls back to the largest cluster, lowest id on ties).
pub fn prune_clusters(counts: &[usize], params: &PruneParams) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    let threshold = (params.min_count as f64).max(params.min_fraction * n as f64);
    let retained: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] as f64 >= threshold).collect();
    if !retained.is_empty() {
        return retained;
    }
    let largest = counts.iter().enumerate().fold((0, 0), |b, (j, &c)| if c > b.1 { (j, c) } else { b }).0;
    vec![largest]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CimKind {
    Constant { context: usize },
    Forest { forest: RandomForest, class_to_context: Vec<usize> },
}

/// Random-Forest router from a normalized vector to a retained context id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextModel {
    pub user_id: String,
    pub retained: Vec<usize>,
    pub training_accuracy: f64,
    pub kind: CimKind,
}

impl ContextModel {
    /// Trains on the vectors of retained clusters only. With a single retained
    /// cluster the model is a constant predictor.
    pub fn train<V: AsRef<[f64]>>(
        user_id: &str,
        vectors: &[V],
        assignments: &[usize],
        retained: &[usize],
        params: &ForestParams,
        seed: u64,
    ) -> Self {
        let mut retained = retained.to_vec();
        retained.sort_unstable();
        retained.dedup();
        if retained.len() < 2 {
            let context = retained.first().copied().unwrap_or(0);
            let accuracy = if assignments.is_empty() {
                1.0
            } else {
                assignments.iter().filter(|&&a| a == context).count() as f64 / assignments.len() as f64
            };
            return Self { user_id: user_id.into(), retained, training_accuracy: accuracy, kind: CimKind::Constant { context } };
        }
        let class_of: BTreeMap<usize, usize> = retained.iter().enumerate().map(|(c, &id)| (id, c)).collect();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (v, a) in vectors.iter().zip(assignments) {
            if let Some(&c) = class_of.get(a) {
                x.push(v.as_ref().to_vec());
                y.push(c);
            }
        }
        let forest = RandomForest::fit(&x, &y, retained.len(), params, seed);
        let correct = x.iter().zip(&y).filter(|(v, &c)| forest.predict(v) == c).count();
        let training_accuracy = correct as f64 / x.len() as f64;
        Self {
            user_id: user_id.into(),
            retained: retained.clone(),
            training_accuracy,
            kind: CimKind::Forest { forest, class_to_context: retained },
        }
    }

    pub fn predict_context(&self, v: &[f64]) -> usize {
        match &self.kind {
            CimKind::Constant { context } => *context,
            CimKind::Forest { forest, class_to_context } => class_to_context[forest.predict(v)],
        }
    }
}

/// Closest centroid among `allowed` ids (lowest id on ties).
pub fn nearest_allowed_centroid(v: &[f64], centroids: &[Vec<f64>], allowed: &[usize]) -> Option<usize> {
    allowed
        .iter()
        .map(|&j| (j, sq_dist(v, &centroids[j])))
        .fold(None, |best: Option<(usize, f64)>, cur| match best {
            Some(b) if b.1 < cur.1 || (b.1 == cur.1 && b.0 < cur.0) => Some(b),
            _ => Some(cur),
        })
        .map(|b| b.0)
}

/// Per-user quotas summing to `min(cap, Σ available)`, as even as availability allows.
pub fn balanced_quotas(available: &[usize], cap: usize) -> Vec<usize> {
    let total: usize = available.iter().sum();
    let mut remaining = cap.min(total);
    let mut quotas = vec![0; available.len()];
    let mut order: Vec<usize> = (0..available.len()).filter(|&u| available[u] > 0).collect();
    order.sort_by_key(|&u| (available[u], u));
    let mut left = order.len();
    for &u in &order {
        let q = available[u].min(remaining / left);
        quotas[u] = q;
        remaining -= q;
        left -= 1;
    }
    // Floor division can leave a remainder; hand it out in user order.
    for u in 0..available.len() {
        if remaining == 0 {
            break;
        }
        if quotas[u] < available[u] {
            quotas[u] += 1;
            remaining -= 1;
        }
    }
    quotas
}

/// Selects impostor vectors that the candidate's CIM routes to `target`,
/// subsampled uniformly to at most `cap` and balanced across impostor users.
///
/// `owners[i]` identifies the impostor user of `vectors[i]`. Returns indices
/// into `vectors`, ascending.
pub fn map_impostor_samples<V: AsRef<[f64]>>(
    cim: &ContextModel,
    vectors: &[V],
    owners: &[usize],
    target: usize,
    cap: usize,
    min_matches: usize,
    seed: u64,
) -> Result<Vec<usize>, ContextError> {
    let routed: Vec<usize> = vectors.iter().map(|v| cim.predict_context(v.as_ref())).collect();
    select_routed(&routed, owners, target, cap, min_matches, seed)
}

/// As [`map_impostor_samples`], with contexts already predicted.
pub fn select_routed(
    routed: &[usize],
    owners: &[usize],
    target: usize,
    cap: usize,
    min_matches: usize,
    seed: u64,
) -> Result<Vec<usize>, ContextError> {
    let mut by_user: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (&ctx, &owner)) in routed.iter().zip(owners).enumerate() {
        if ctx == target {
            by_user.entry(owner).or_default().push(i);
        }
    }
    let matches: usize = by_user.values().map(Vec::len).sum();
    if matches < min_matches.max(1) {
        return Err(ContextError::InsufficientImpostors(matches));
    }
    let users: Vec<&Vec<usize>> = by_user.values().collect();
    let quotas = balanced_quotas(&users.iter().map(|v| v.len()).collect::<Vec<_>>(), cap);
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(cap.min(matches));
    for (idx, &q) in users.iter().zip(&quotas) {
        if q == idx.len() {
            out.extend(idx.iter().copied());
        } else {
            out.extend(sample(&mut rng, idx.len(), q).into_iter().map(|k| idx[k]));
        }
    }
    out.sort_unstable();
    Ok(out)
}
