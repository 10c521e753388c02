use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Weights start uniform in `(-init_range, init_range)`.
    pub init_range: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { hidden: 10, learning_rate: 0.1, epochs: 500, init_range: 0.5 }
    }
}

/// One tanh hidden layer, sigmoid output, trained on mean cross-entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// hidden × input, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub inputs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpGradient {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.w1.clone();
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }
}

impl MlpModel {
    pub fn init(inputs: usize, params: &MlpParams, seed: u64) -> Self {
        let mut rng = crate::rng::seeded(seed);
        let r = params.init_range;
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-r..r)).collect() };
        let w1 = draw(params.hidden * inputs);
        let b1 = draw(params.hidden);
        let w2 = draw(params.hidden);
        let b2 = draw(1)[0];
        Self { w1, b1, w2, b2, inputs }
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    fn forward(&self, x: &[f64], hidden: &mut [f64]) -> f64 {
        let d = self.inputs;
        for (h, a) in hidden.iter_mut().enumerate() {
            let z = self.b1[h] + self.w1[h * d..(h + 1) * d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            *a = z.tanh();
        }
        sigmoid(self.b2 + self.w2.iter().zip(hidden.iter()).map(|(w, a)| w * a).sum::<f64>())
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.hidden()];
        self.forward(x, &mut hidden)
    }

    /// Mean cross-entropy over the dataset and its gradient by backpropagation.
    pub fn loss_and_gradient(&self, data: &LabeledDataset) -> (f64, MlpGradient) {
        let (d, nh) = (self.inputs, self.hidden());
        let n = data.len() as f64;
        let mut g = MlpGradient { w1: vec![0.0; nh * d], b1: vec![0.0; nh], w2: vec![0.0; nh], b2: 0.0 };
        let mut hidden = vec![0.0; nh];
        let mut loss = 0.0;
        for (x, &label) in data.vectors().iter().zip(data.labels()) {
            let y = f64::from(u8::from(label));
            let o = self.forward(x, &mut hidden);
            let oc = o.clamp(1e-300, 1.0 - 1e-16);
            loss -= y * oc.ln() + (1.0 - y) * (1.0 - oc).ln();
            let delta_out = (o - y) / n;
            g.b2 += delta_out;
            for (h, &a) in hidden.iter().enumerate().take(nh) {
                g.w2[h] += delta_out * a;
                let delta_h = delta_out * self.w2[h] * (1.0 - a * a);
                g.b1[h] += delta_h;
                for (gw, v) in g.w1[h * d..(h + 1) * d].iter_mut().zip(x) {
                    *gw += delta_h * v;
                }
            }
        }
        (loss / n, g)
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut v = self.w1.clone();
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_params_flat(&mut self, p: &[f64]) {
        let (a, b, c) = (self.w1.len(), self.b1.len(), self.w2.len());
        self.w1.copy_from_slice(&p[..a]);
        self.b1.copy_from_slice(&p[a..a + b]);
        self.w2.copy_from_slice(&p[a + b..a + b + c]);
        self.b2 = p[a + b + c];
    }

    /// Full-batch gradient descent from a seeded uniform initialization.
    pub fn fit(data: &LabeledDataset, params: &MlpParams, seed: u64) -> Self {
        let mut model = Self::init(data.dim(), params, seed);
        let lr = params.learning_rate;
        for _ in 0..params.epochs {
            let (_, g) = model.loss_and_gradient(data);
            model.w1.iter_mut().zip(&g.w1).for_each(|(w, d)| *w -= lr * d);
            model.b1.iter_mut().zip(&g.b1).for_each(|(w, d)| *w -= lr * d);
            model.w2.iter_mut().zip(&g.w2).for_each(|(w, d)| *w -= lr * d);
            model.b2 -= lr * g.b2;
        }
        model
    }
}
