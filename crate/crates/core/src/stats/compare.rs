use serde::{Deserialize, Serialize};

use super::{friedman_test, ks_test_standard_normal, wilcoxon_signed_rank, StatsError, TestOutcome, WilcoxonOutcome};

/// Tests for one unordered pair of algorithms over paired per-user EERs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    /// Normality of the standardized differences `a - b`.
    pub ks: Result<TestOutcome, StatsError>,
    pub friedman: Result<TestOutcome, StatsError>,
    pub wilcoxon: Result<WilcoxonOutcome, StatsError>,
}

impl PairComparison {
    pub fn label(&self) -> String {
        format!("{} - {}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub algorithms: Vec<String>,
    pub n_users: usize,
    pub pairs: Vec<PairComparison>,
    /// Friedman over all algorithms at once.
    pub omnibus: Result<TestOutcome, StatsError>,
}

fn standardized(d: &[f64]) -> Result<Vec<f64>, StatsError> {
    if d.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = if d.len() > 1 { d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    if !(var > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    let sd = var.sqrt();
    Ok(d.iter().map(|v| (v - mean) / sd).collect())
}

/// Pairwise comparison of algorithms given a users × algorithms EER matrix.
///
/// Pairs are emitted in column order: (0,1), (0,2), ..., (k-2,k-1). Sub-test
/// failures are recorded per pair rather than aborting the report.
pub fn compare_classifiers(algorithms: &[String], matrix: &[Vec<f64>]) -> Result<ComparisonReport, StatsError> {
    let k = algorithms.len();
    if matrix.len() < 2 || k < 2 {
        return Err(StatsError::DegenerateMatrix { rows: matrix.len(), cols: k });
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != k) {
        return Err(StatsError::LengthMismatch(k, row.len()));
    }
    let column = |j: usize| -> Vec<f64> { matrix.iter().map(|r| r[j]).collect() };
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (column(i), column(j));
            let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let two_col: Vec<Vec<f64>> = a.iter().zip(&b).map(|(&x, &y)| vec![x, y]).collect();
            pairs.push(PairComparison {
                a: algorithms[i].clone(),
                b: algorithms[j].clone(),
                ks: standardized(&diffs).and_then(|z| ks_test_standard_normal(&z)),
                friedman: friedman_test(&two_col),
                wilcoxon: wilcoxon_signed_rank(&a, &b),
            });
        }
    }
    Ok(ComparisonReport { algorithms: algorithms.to_vec(), n_users: matrix.len(), pairs, omnibus: friedman_test(matrix) })
}

impl ComparisonReport {
    /// One row per pair: `pair,ks_p,friedman_p,wilcoxon_p,note`. Failed tests
    /// leave their cell empty and are described in `note`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair,ks_p,friedman_p,wilcoxon_p,note\n");
        for p in &self.pairs {
            let mut notes = Vec::new();
            let mut cell = |name: &str, r: Result<f64, &StatsError>| match r {
                Ok(v) => format!("{v:e}"),
                Err(e) => {
                    notes.push(format!("{name}: {e}"));
                    String::new()
                }
            };
            let ks = cell("ks", p.ks.as_ref().map(|o| o.p_value));
            let fr = cell("friedman", p.friedman.as_ref().map(|o| o.p_value));
            let wx = cell("wilcoxon", p.wilcoxon.as_ref().map(|o| o.outcome.p_value));
            out.push_str(&format!("{},{ks},{fr},{wx},{}\n", p.label(), notes.join("; ")));
        }
        out
    }
}
