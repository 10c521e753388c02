use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive, seeded, Rng as SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per node; `None` means `floor(sqrt(d))`.
    pub mtry: Option<usize>,
    /// Nodes with fewer samples become leaves.
    pub min_node_size: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { trees: 100, mtry: None, min_node_size: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t")]
pub enum TreeNode {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree with Gini splits at midpoints between sorted
/// distinct values. `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

fn majority(counts: &[usize]) -> usize {
    // First maximum, so ties go to the smallest class id.
    counts.iter().enumerate().fold((0, 0), |best, (c, &n)| if n > best.1 { (c, n) } else { best }).0
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    min_node: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Best (feature, threshold) among `mtry` random features, if any split
    /// lowers the weighted Gini impurity.
    fn best_split(&self, idx: &mut [usize], counts: &[usize], rng: &mut SeededRng) -> Option<(usize, f64)> {
        let n = idx.len() as f64;
        let parent_score: f64 = counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n;
        let dim = self.x[idx[0]].len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut left = vec![0usize; self.n_classes];
        for f in sample(rng, dim, self.mtry.min(dim)).into_iter() {
            idx.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            left.iter_mut().for_each(|c| *c = 0);
            let (mut sl, mut sr) = (0.0f64, parent_score * n);
            // sl = Σ left², sr = Σ right² (class counts squared).
            for p in 0..idx.len() - 1 {
                let cls = self.y[idx[p]];
                let lc = left[cls] as f64;
                let rc = (counts[cls] - left[cls]) as f64;
                sl += 2.0 * lc + 1.0;
                sr -= 2.0 * rc - 1.0;
                left[cls] += 1;
                let (v, w) = (self.x[idx[p]][f], self.x[idx[p + 1]][f]);
                if v == w {
                    continue;
                }
                let nl = (p + 1) as f64;
                let score = sl / nl + sr / (n - nl);
                if score > parent_score + 1e-12 && best.is_none_or(|b| score > b.0) {
                    best = Some((score, f, 0.5 * (v + w)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, mut idx: Vec<usize>, rng: &mut SeededRng) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        self.nodes.push(TreeNode::Leaf { class: majority(&counts) });
        if pure || idx.len() < self.min_node {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&mut idx, &counts, rng) else { return id };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[id] = TreeNode::Split { feature, threshold, left, right };
        id
    }
}

impl DecisionTree {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        sample_idx: Vec<usize>,
        mtry: usize,
        min_node: usize,
        rng: &mut SeededRng,
    ) -> Self {
        let mut b = Builder { x, y, n_classes, mtry: mtry.max(1), min_node: min_node.max(2), nodes: Vec::new() };
        b.grow(sample_idx, rng);
        Self { nodes: b.nodes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { class } => return *class,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Each tree sees a bootstrap sample drawn from its own seed, derived from
    /// `seed` and the tree index, so the result is independent of thread count.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &ForestParams, seed: u64) -> Self {
        assert!(!x.is_empty(), "forest needs training data");
        let dim = x[0].len();
        let mtry = params.mtry.unwrap_or_else(|| ((dim as f64).sqrt().floor() as usize).max(1));
        let n = x.len();
        let trees = (0..params.trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded(derive(seed, t as u64));
                let boot: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                DecisionTree::fit(x, y, n_classes, boot, mtry, params.min_node_size, &mut rng)
            })
            .collect();
        Self { n_classes, trees }
    }

    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut v = vec![0; self.n_classes];
        for t in &self.trees {
            v[t.predict(x)] += 1;
        }
        v
    }

    /// Majority vote; ties go to the smallest class.
    pub fn predict(&self, x: &[f64]) -> usize {
        majority(&self.votes(x))
    }

    pub fn vote_fraction(&self, x: &[f64], class: usize) -> f64 {
        self.trees.iter().filter(|t| t.predict(x) == class).count() as f64 / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = f64::from(i % 2);
            let b = f64::from((i / 2) % 2);
            x.push(vec![a + 0.01 * f64::from(i), b]);
            y.push((a as usize) ^ (b as usize));
        }
        (x, y)
    }

    #[test]
    fn single_tree_fits_training_data() {
        let (x, y) = xor_data();
        let mut rng = seeded(1);
        let t = DecisionTree::fit(&x, &y, 2, (0..x.len()).collect(), 2, 2, &mut rng);
        assert!(x.iter().zip(&y).all(|(v, &c)| t.predict(v) == c));
    }

    #[test]
    fn identical_genuine_leaves_score_one() {
        let forest = RandomForest {
            n_classes: 2,
            trees: vec![DecisionTree { nodes: vec![TreeNode::Leaf { class: 1 }] }; 7],
        };
        assert_eq!(forest.vote_fraction(&[0.2], 1), 1.0);
        assert_eq!(forest.predict(&[0.2]), 1);
    }

    #[test]
    fn bit_reproducible() {
        let (x, y) = xor_data();
        let a = RandomForest::fit(&x, &y, 2, &ForestParams::default(), 5);
        let b = RandomForest::fit(&x, &y, 2, &ForestParams::default(), 5);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, RandomForest::fit(&x, &y, 2, &ForestParams::default(), 6));
    }

    #[test]
    fn multiclass_votes_sum_to_tree_count() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![f64::from(i)]).collect();
        let y: Vec<usize> = (0..30).map(|i| i / 10).collect();
        let f = RandomForest::fit(&x, &y, 3, &ForestParams { trees: 25, ..Default::default() }, 3);
        assert_eq!(f.votes(&[15.0]).iter().sum::<usize>(), 25);
        assert_eq!(f.predict(&[2.0]), 0);
        assert_eq!(f.predict(&[27.0]), 2);
    }
}
