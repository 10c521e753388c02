//! Nonparametric tests used to screen features and compare classifiers.

mod compare;
mod friedman;
mod ks;
pub mod special;
mod wilcoxon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compare::{compare_classifiers, ComparisonReport, PairComparison};
pub use friedman::{friedman_test, midranks};
pub use ks::ks_test_standard_normal;
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonOutcome, EXACT_LIMIT};

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("matrix must be at least 2x2, got {rows}x{cols}")]
    DegenerateMatrix { rows: usize, cols: usize },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("differences have zero variance and cannot be standardized")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestMethod {
    KolmogorovSmirnov,
    Friedman,
    WilcoxonSignedRank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    /// Sample size, or number of blocks for Friedman.
    pub n: usize,
    /// Number of treatments (Friedman only).
    pub k: Option<usize>,
}
