use serde::{Deserialize, Serialize};

/// Per-component min–max scaling fitted on training vectors only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxNormalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxNormalizer {
    /// Panics on an empty training set or ragged vectors.
    pub fn fit<V: AsRef<[f64]>>(train: &[V]) -> Self {
        let first = train.first().expect("min-max fit needs at least one vector").as_ref();
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for v in &train[1..] {
            let v = v.as_ref();
            assert_eq!(v.len(), min.len(), "ragged training vectors");
            for (j, &x) in v.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        Self { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps into `[0, 1]`, clamping values outside the training range.
    /// Components that were constant in training map to 0.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| if hi > lo { ((x - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_rules() {
        let n = MinMaxNormalizer::fit(&[vec![0.0], vec![10.0]]);
        assert_eq!(n.apply(&[5.0]), vec![0.5]);
        assert_eq!(n.apply(&[0.0]), vec![0.0]);
        assert_eq!(n.apply(&[10.0]), vec![1.0]);
        assert_eq!(n.apply(&[12.0]), vec![1.0]);
        assert_eq!(n.apply(&[-3.0]), vec![0.0]);
        let c = MinMaxNormalizer::fit(&[vec![2.0], vec![2.0]]);
        assert_eq!(c.apply(&[7.0]), vec![0.0]);
    }
}
