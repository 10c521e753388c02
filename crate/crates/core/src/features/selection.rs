//! Normality screening and correlation-based feature subset selection (CFS).

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::info::correlation;
use super::FeatureError;
use crate::stats::ks_test_standard_normal;

/// For each column, whether the one-sample KS test against N(0, 1) rejects
/// normality of the standardized column at `alpha`. Constant columns
/// standardize to zeros and are rejected for n ≥ 8.
pub fn ks_normality_screen(columns: &[Vec<f64>], alpha: f64) -> Vec<bool> {
    columns
        .iter()
        .map(|col| {
            let z = super::dtw::standardize(col);
            ks_test_standard_normal(&z).map(|o| o.p_value < alpha).unwrap_or(true)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    /// Selected component indices, ascending.
    pub indices: Vec<usize>,
    pub merit: f64,
}

impl FeatureSubset {
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| v[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfsParams {
    /// Number of open subsets kept between expansions.
    pub frontier: usize,
    /// Consecutive non-improving expansions before the search stops.
    pub max_stale: usize,
}

impl Default for CfsParams {
    fn default() -> Self {
        Self { frontier: 5, max_stale: 5 }
    }
}

/// Feature–class and feature–feature absolute correlations for one dataset.
pub struct CorrelationTable {
    class: Vec<f64>,
    pairwise: Vec<f64>,
    dim: usize,
}

impl CorrelationTable {
    pub fn new<V: AsRef<[f64]>>(vectors: &[V], labels: &[bool]) -> Self {
        let dim = vectors.first().map_or(0, |v| v.as_ref().len());
        let cols: Vec<Vec<f64>> =
            (0..dim).map(|j| vectors.iter().map(|v| v.as_ref()[j]).collect()).collect();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
        let class = cols.iter().map(|c| correlation(c, &y).abs()).collect();
        let mut pairwise = vec![0.0; dim * dim];
        for i in 0..dim {
            pairwise[i * dim + i] = 1.0;
            for j in i + 1..dim {
                let r = correlation(&cols[i], &cols[j]).abs();
                pairwise[i * dim + j] = r;
                pairwise[j * dim + i] = r;
            }
        }
        Self { class, pairwise, dim }
    }

    pub fn class_corr(&self, f: usize) -> f64 {
        self.class[f]
    }

    pub fn feature_corr(&self, a: usize, b: usize) -> f64 {
        self.pairwise[a * self.dim + b]
    }

    /// `k·r̄cf / sqrt(k + k(k−1)·r̄ff)`; 0 for the empty set.
    pub fn merit(&self, subset: &[usize]) -> f64 {
        let k = subset.len();
        if k == 0 {
            return 0.0;
        }
        let cf: f64 = subset.iter().map(|&f| self.class[f]).sum();
        let mut ff = 0.0;
        for (i, &a) in subset.iter().enumerate() {
            for &b in &subset[i + 1..] {
                ff += self.feature_corr(a, b);
            }
        }
        let denom = (k as f64 + 2.0 * ff).sqrt();
        if denom > 0.0 {
            cf / denom
        } else {
            0.0
        }
    }
}

#[derive(Clone)]
struct Node {
    subset: Vec<usize>,
    cf: f64,
    ff: f64,
    merit: f64,
}

fn merit_of(cf: f64, ff: f64, k: usize) -> f64 {
    let denom = (k as f64 + 2.0 * ff).sqrt();
    if denom > 0.0 {
        cf / denom
    } else {
        0.0
    }
}

fn rank(a: &Node, b: &Node) -> Ordering {
    b.merit
        .total_cmp(&a.merit)
        .then(a.subset.len().cmp(&b.subset.len()))
        .then_with(|| a.subset.cmp(&b.subset))
}

/// Best-first forward search over subsets maximizing CFS merit.
///
/// The open list holds at most `frontier` subsets; each step expands the best
/// one by every unused feature. The search ends after `max_stale` consecutive
/// expansions that do not strictly improve the best merit, so equal-merit
/// supersets never displace a smaller subset.
pub fn cfs_select<V: AsRef<[f64]>>(
    vectors: &[V],
    labels: &[bool],
    params: &CfsParams,
) -> Result<FeatureSubset, FeatureError> {
    if vectors.len() != labels.len() {
        return Err(FeatureError::LengthMismatch(vectors.len(), labels.len()));
    }
    if vectors.len() < 2 || labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(FeatureError::DegenerateLabels);
    }
    let table = CorrelationTable::new(vectors, labels);
    let dim = table.dim;
    if dim == 0 {
        return Err(FeatureError::EmptySequence);
    }

    let mut open = vec![Node { subset: Vec::new(), cf: 0.0, ff: 0.0, merit: 0.0 }];
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut best: Option<Node> = None;
    let mut stale = 0;
    while !open.is_empty() && stale < params.max_stale.max(1) {
        let node = open.remove(0);
        let mut improved = false;
        for f in 0..dim {
            if node.subset.contains(&f) {
                continue;
            }
            let mut subset = node.subset.clone();
            let pos = subset.partition_point(|&g| g < f);
            subset.insert(pos, f);
            if !visited.insert(subset.clone()) {
                continue;
            }
            let cf = node.cf + table.class[f];
            let ff = node.ff + node.subset.iter().map(|&g| table.feature_corr(f, g)).sum::<f64>();
            let child = Node { merit: merit_of(cf, ff, subset.len()), subset, cf, ff };
            let better = match &best {
                None => true,
                Some(b) => child.merit > b.merit + 1e-12,
            };
            if better {
                best = Some(child.clone());
                improved = true;
            }
            open.push(child);
        }
        open.sort_by(rank);
        open.truncate(params.frontier.max(1));
        if improved {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    let best = best.expect("at least one feature was evaluated");
    Ok(FeatureSubset { indices: best.subset, merit: best.merit })
}
