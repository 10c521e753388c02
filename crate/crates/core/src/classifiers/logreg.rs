use serde::{Deserialize, Serialize};

use super::linalg::cholesky_solve;
use super::{sigmoid, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self { lambda: 1e-6, max_iter: 100, tol: 1e-8 }
    }
}

/// Binomial GLM with logit link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear(beta: &[f64], x: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

fn objective(beta: &[f64], data: &LabeledDataset, lambda: f64) -> f64 {
    let nll: f64 = data
        .vectors()
        .iter()
        .zip(data.labels())
        .map(|(x, &y)| {
            let eta = linear(beta, x);
            softplus(eta) - if y { eta } else { 0.0 }
        })
        .sum();
    nll + 0.5 * lambda * beta.iter().map(|b| b * b).sum::<f64>()
}

fn gradient(beta: &[f64], data: &LabeledDataset, lambda: f64) -> Vec<f64> {
    let mut g: Vec<f64> = beta.iter().map(|b| lambda * b).collect();
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        let r = sigmoid(linear(beta, x)) - f64::from(u8::from(y));
        g[0] += r;
        for (gj, v) in g[1..].iter_mut().zip(x) {
            *gj += r * v;
        }
    }
    g
}

/// Backtracking step along `-direction`; returns the accepted step or `None`.
fn line_search(beta: &[f64], direction: &[f64], data: &LabeledDataset, lambda: f64, start: f64) -> Option<Vec<f64>> {
    let base = objective(beta, data, lambda);
    let mut step = start;
    for _ in 0..40 {
        let cand: Vec<f64> = beta.iter().zip(direction).map(|(b, d)| b - step * d).collect();
        let obj = objective(&cand, data, lambda);
        if obj.is_finite() && obj < base {
            return Some(cand);
        }
        step *= 0.5;
    }
    None
}

impl LogisticModel {
    /// Iteratively reweighted least squares on the L2-penalized likelihood.
    /// If the weighted Hessian cannot be factorized, the iteration takes a
    /// backtracking gradient step instead.
    pub fn fit(data: &LabeledDataset, params: &LogRegParams) -> Self {
        let p = data.dim() + 1;
        let mut beta = vec![0.0; p];
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..params.max_iter {
            iterations += 1;
            let g = gradient(&beta, data, params.lambda);
            let mut h = vec![0.0; p * p];
            for i in 0..p {
                h[i * p + i] = params.lambda;
            }
            let mut row = vec![1.0; p];
            for x in data.vectors() {
                row[1..].copy_from_slice(x);
                let mu = sigmoid(linear(&beta, x));
                let w = mu * (1.0 - mu);
                if w == 0.0 {
                    continue;
                }
                for i in 0..p {
                    let wi = w * row[i];
                    for j in 0..=i {
                        h[i * p + j] += wi * row[j];
                    }
                }
            }
            for i in 0..p {
                for j in 0..i {
                    h[j * p + i] = h[i * p + j];
                }
            }
            let next = match cholesky_solve(&h, &g, p) {
                Some(delta) => line_search(&beta, &delta, data, params.lambda, 1.0),
                None => {
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                    line_search(&beta, &g, data, params.lambda, 1.0 / norm)
                }
            };
            let Some(next) = next else {
                converged = true;
                break;
            };
            let change = next.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            beta = next;
            if change < params.tol {
                converged = true;
                break;
            }
        }
        Self { intercept: beta[0], coefficients: beta[1..].to_vec(), iterations, converged }
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision_value(x))
    }
}
