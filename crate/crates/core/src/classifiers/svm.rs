use serde::{Deserialize, Serialize};

use super::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / dimension`.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// One pass is `n` pair updates.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: None, tol: 1e-3, max_passes: 10_000 }
    }
}

/// C-SVC with an RBF kernel. Only support vectors are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoReport {
    pub alphas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp()
}

const TAU: f64 = 1e-12;

impl SvmModel {
    pub fn fit(data: &LabeledDataset, params: &SvmParams) -> Self {
        Self::fit_with_report(data, params).0
    }

    /// Dual solved by SMO with second-order working-set selection; stops when
    /// the maximal KKT violation `m(α) − M(α)` drops below `tol`.
    pub fn fit_with_report(data: &LabeledDataset, params: &SvmParams) -> (Self, SmoReport) {
        let x = data.vectors();
        let n = x.len();
        let gamma = params.gamma.unwrap_or(1.0 / data.dim().max(1) as f64);
        let c = params.c;
        let y: Vec<f64> = data.labels().iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
            for j in 0..i {
                let v = y[i] * y[j] * rbf(&x[i], &x[j], gamma);
                q[i * n + j] = v;
                q[j * n + i] = v;
            }
        }
        let qd: Vec<f64> = (0..n).map(|i| q[i * n + i]).collect();
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let is_upper = |a: f64| a >= c;
        let is_lower = |a: f64| a <= 0.0;

        let max_iter = params.max_passes.saturating_mul(n.max(1));
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..n {
                if y[t] > 0.0 {
                    if !is_upper(alpha[t]) && -grad[t] >= gmax {
                        gmax = -grad[t];
                        i_sel = Some(t);
                    }
                } else if !is_lower(alpha[t]) && grad[t] >= gmax {
                    gmax = grad[t];
                    i_sel = Some(t);
                }
            }
            let Some(i) = i_sel else {
                converged = true;
                break;
            };
            let qi = &q[i * n..(i + 1) * n];
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut obj_min = f64::INFINITY;
            for t in 0..n {
                let (grad_diff, quad) = if y[t] > 0.0 {
                    if is_lower(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(grad[t]);
                    (gmax + grad[t], qd[i] + qd[t] - 2.0 * y[i] * qi[t])
                } else {
                    if is_upper(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(-grad[t]);
                    (gmax - grad[t], qd[i] + qd[t] + 2.0 * y[i] * qi[t])
                };
                if grad_diff > 0.0 {
                    let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
            if gmax + gmax2 < params.tol {
                converged = true;
                break;
            }
            let Some(j) = j_sel else {
                converged = true;
                break;
            };
            iterations += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let qij = qi[j];
            if y[i] != y[j] {
                let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (da_i, da_j) = (alpha[i] - old_i, alpha[j] - old_j);
            let qj = &q[j * n..(j + 1) * n];
            for t in 0..n {
                grad[t] += q[i * n + t] * da_i + qj[t] * da_j;
            }
        }
        if !converged {
            log::warn!("SMO stopped after {iterations} updates without reaching tolerance {}", params.tol);
        }

        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut n_free, mut sum_free) = (0usize, 0.0);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if is_upper(alpha[t]) {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if is_lower(alpha[t]) {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        let rho = if n_free > 0 { sum_free / n_free as f64 } else { 0.5 * (ub + lb) };

        let mut support = Vec::new();
        let mut coef = Vec::new();
        for t in 0..n {
            if alpha[t] > 0.0 {
                support.push(x[t].clone());
                coef.push(alpha[t] * y[t]);
            }
        }
        (Self { gamma, support, coef, rho }, SmoReport { alphas: alpha, iterations, converged })
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, a)| a * rbf(s, x, self.gamma)).sum::<f64>() - self.rho
    }
}
