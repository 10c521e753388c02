use serde::{Deserialize, Serialize};

use super::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl KnnModel {
    pub fn fit(data: &LabeledDataset, params: &KnnParams) -> Self {
        Self { k: params.k.max(1), vectors: data.vectors().to_vec(), labels: data.labels().to_vec() }
    }

    /// Fraction of genuine labels among the k nearest training vectors
    /// (Euclidean); equal distances keep training order.
    pub fn score(&self, q: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (v.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(d.len());
        d[..k].iter().filter(|(_, i)| self.labels[*i]).count() as f64 / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(labels: &[bool]) -> KnnModel {
        let v: Vec<Vec<f64>> = (0..labels.len()).map(|i| vec![i as f64]).collect();
        KnnModel::fit(&LabeledDataset::new(v, labels.to_vec()).unwrap(), &KnnParams::default())
    }

    #[test]
    fn all_genuine_neighbours() {
        let mut labels = vec![true; 10];
        labels.extend(vec![false; 10]);
        assert_eq!(line(&labels).score(&[0.0]), 1.0);
    }

    #[test]
    fn half_genuine_neighbours() {
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        assert_eq!(line(&labels).score(&[4.5]), 0.5);
    }

    #[test]
    fn k_truncates_to_training_size() {
        assert_eq!(line(&[true, false, false]).score(&[0.0]), 1.0 / 3.0);
    }

    #[test]
    fn ties_follow_training_order() {
        // Eleven equidistant points; the first ten in training order win.
        let mut v = vec![vec![1.0]; 11];
        v.push(vec![5.0]);
        let mut labels = vec![true; 10];
        labels.push(false);
        labels.push(false);
        let m = KnnModel::fit(&LabeledDataset::new(v, labels).unwrap(), &KnnParams::default());
        assert_eq!(m.score(&[0.0]), 1.0);
    }
}
