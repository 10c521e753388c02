//! The five authentication classifiers behind one train/score interface.
//!
//! Every model maps a feature vector to a genuine score in `[0, 1]`; higher
//! means more genuine-like. Hyperparameter defaults mirror the settings the
//! authentication study used where it stated them, and fixed explicit values
//! elsewhere.

mod forest;
mod knn;
mod linalg;
mod logreg;
mod mlp;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{DecisionTree, ForestParams, RandomForest, TreeNode};
pub use knn::{KnnModel, KnnParams};
pub use logreg::{LogRegParams, LogisticModel};
pub use mlp::{MlpGradient, MlpModel, MlpParams};
pub use svm::{SmoReport, SvmModel, SvmParams};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training data contains a single class")]
    SingleClassDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty training set")]
    EmptyDataset,
    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "LOGREG")]
    LogReg,
    #[serde(rename = "MLP")]
    Mlp,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "RF")]
    Rf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::LogReg, Algorithm::Mlp, Algorithm::Knn, Algorithm::Svm, Algorithm::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::LogReg => "LOGREG",
            Algorithm::Mlp => "MLP",
            Algorithm::Knn => "KNN",
            Algorithm::Svm => "SVM",
            Algorithm::Rf => "RF",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LOGREG" | "LR" => Ok(Algorithm::LogReg),
            "MLP" | "NNET" => Ok(Algorithm::Mlp),
            "KNN" => Ok(Algorithm::Knn),
            "SVM" => Ok(Algorithm::Svm),
            "RF" => Ok(Algorithm::Rf),
            _ => Err(ClassifierError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// Vectors with genuine (`true`) / impostor (`false`) labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    vectors: Vec<Vec<f64>>,
    labels: Vec<bool>,
    dim: usize,
}

impl LabeledDataset {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self, ClassifierError> {
        if vectors.is_empty() {
            return Err(ClassifierError::EmptyDataset);
        }
        if vectors.len() != labels.len() {
            return Err(ClassifierError::DimensionMismatch { expected: vectors.len(), got: labels.len() });
        }
        let dim = vectors[0].len();
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(ClassifierError::DimensionMismatch { expected: dim, got: v.len() });
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(ClassifierError::SingleClassDataset);
        }
        Ok(Self { vectors, labels, dim })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub logreg: LogRegParams,
    pub mlp: MlpParams,
    pub knn: KnnParams,
    pub svm: SvmParams,
    pub rf: ForestParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    LogReg(LogisticModel),
    Mlp(MlpModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Rf(RandomForest),
}

/// A trained authentication model plus the feature indices it reads from a
/// full normalized vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthModel {
    pub algorithm: Algorithm,
    pub features: Vec<usize>,
    pub model: ModelKind,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl AuthModel {
    /// Trains on `dataset`, whose columns are the full-vector components listed
    /// in `features`.
    pub fn train(
        algorithm: Algorithm,
        dataset: &LabeledDataset,
        features: Vec<usize>,
        params: &ClassifierParams,
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        if features.len() != dataset.dim() {
            return Err(ClassifierError::DimensionMismatch { expected: dataset.dim(), got: features.len() });
        }
        let model = match algorithm {
            Algorithm::LogReg => ModelKind::LogReg(LogisticModel::fit(dataset, &params.logreg)),
            Algorithm::Mlp => ModelKind::Mlp(MlpModel::fit(dataset, &params.mlp, seed)),
            Algorithm::Knn => ModelKind::Knn(KnnModel::fit(dataset, &params.knn)),
            Algorithm::Svm => ModelKind::Svm(SvmModel::fit(dataset, &params.svm)),
            Algorithm::Rf => {
                let labels: Vec<usize> = dataset.labels().iter().map(|&l| usize::from(l)).collect();
                ModelKind::Rf(RandomForest::fit(dataset.vectors(), &labels, 2, &params.rf, seed))
            }
        };
        Ok(Self { algorithm, features, model })
    }

    /// Trains on every column of `dataset`.
    pub fn train_full(
        algorithm: Algorithm,
        dataset: &LabeledDataset,
        params: &ClassifierParams,
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        Self::train(algorithm, dataset, (0..dataset.dim()).collect(), params, seed)
    }

    /// Scores a vector already reduced to this model's features.
    pub fn score_selected(&self, x: &[f64]) -> Result<f64, ClassifierError> {
        if x.len() != self.features.len() {
            return Err(ClassifierError::DimensionMismatch { expected: self.features.len(), got: x.len() });
        }
        let s = match &self.model {
            ModelKind::LogReg(m) => m.score(x),
            ModelKind::Mlp(m) => m.score(x),
            ModelKind::Knn(m) => m.score(x),
            ModelKind::Svm(m) => sigmoid(m.decision_value(x)),
            ModelKind::Rf(m) => m.vote_fraction(x, 1),
        };
        Ok(s.clamp(0.0, 1.0))
    }

    /// Scores a full normalized vector by projecting it onto the stored features.
    pub fn score(&self, full: &[f64]) -> Result<f64, ClassifierError> {
        if let Some(&bad) = self.features.iter().find(|&&i| i >= full.len()) {
            return Err(ClassifierError::DimensionMismatch { expected: bad + 1, got: full.len() });
        }
        let x: Vec<f64> = self.features.iter().map(|&i| full[i]).collect();
        self.score_selected(&x)
    }
}

#[cfg(test)]
pub(crate) mod testdata {
    use super::LabeledDataset;
    use rand::Rng;

    /// Two Gaussian-ish blobs separated along every axis.
    pub fn blobs(n_per_class: usize, dim: usize, gap: f64, seed: u64) -> LabeledDataset {
        let mut rng = crate::rng::seeded(seed);
        let mut v = Vec::new();
        let mut l = Vec::new();
        for i in 0..2 * n_per_class {
            let genuine = i % 2 == 0;
            let centre = if genuine { 0.5 + gap / 2.0 } else { 0.5 - gap / 2.0 };
            v.push((0..dim).map(|_| centre + rng.gen_range(-0.15..0.15)).collect());
            l.push(genuine);
        }
        LabeledDataset::new(v, l).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
        assert!("XGB".parse::<Algorithm>().is_err());
    }

    #[test]
    fn dataset_validation() {
        assert_eq!(LabeledDataset::new(vec![vec![1.0], vec![2.0]], vec![true, true]).unwrap_err(), ClassifierError::SingleClassDataset);
        assert!(matches!(
            LabeledDataset::new(vec![vec![1.0], vec![2.0, 3.0]], vec![true, false]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn every_algorithm_separates_blobs() {
        let train = testdata::blobs(40, 4, 0.4, 1);
        let test = testdata::blobs(40, 4, 0.4, 2);
        let params = ClassifierParams::default();
        for alg in Algorithm::ALL {
            let m = AuthModel::train_full(alg, &train, &params, 9).unwrap();
            let (mut g, mut i, mut ng, mut ni) = (0.0, 0.0, 0.0, 0.0);
            for (v, &l) in test.vectors().iter().zip(test.labels()) {
                let s = m.score(v).unwrap();
                assert!((0.0..=1.0).contains(&s));
                if l {
                    g += s;
                    ng += 1.0;
                } else {
                    i += s;
                    ni += 1.0;
                }
            }
            assert!(g / ng > i / ni, "{alg}");
            assert_eq!(m.score(&test.vectors()[0]).unwrap(), m.score(&test.vectors()[0]).unwrap());
        }
    }

    #[test]
    fn projected_scoring_checks_dimension() {
        let train = testdata::blobs(10, 2, 0.5, 3);
        let m = AuthModel::train(Algorithm::Knn, &train, vec![4, 7], &ClassifierParams::default(), 0).unwrap();
        let mut full = vec![0.0; 8];
        full[4] = 0.75;
        full[7] = 0.75;
        assert_eq!(m.score(&full).unwrap(), 1.0);
        assert!(matches!(m.score(&[0.0; 5]), Err(ClassifierError::DimensionMismatch { .. })));
        assert!(matches!(m.score_selected(&[0.0; 3]), Err(ClassifierError::DimensionMismatch { .. })));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
