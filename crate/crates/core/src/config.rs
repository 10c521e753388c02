//! Run configuration: one TOML document with a section per pipeline stage.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! Validation reports the first offending key in dotted form, e.g. `context.k`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifiers::{Algorithm, ClassifierParams, ForestParams};
use crate::context::{KMeansParams, PruneParams};
use crate::eval::{EnrollConfig, FteRanking};
use crate::features::{CfsParams, WindowConfig};
use crate::preprocess::UnattendedThresholds;
use crate::synth::PopulationParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Unreadable { .. } => None,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads for per-user jobs; 0 uses every core.
    pub jobs: usize,
    pub algorithms: Vec<Algorithm>,
    pub save_profiles: bool,
    pub export_features: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 42, jobs: 0, algorithms: Algorithm::ALL.to_vec(), save_profiles: true, export_features: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub thresholds: UnattendedThresholds,
    pub median_span: usize,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self { thresholds: UnattendedThresholds::default(), median_span: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub frontier: usize,
    pub max_stale: usize,
    pub ks_alpha: f64,
}

impl Default for SelectionSection {
    fn default() -> Self {
        let cfs = CfsParams::default();
        Self { frontier: cfs.frontier, max_stale: cfs.max_stale, ks_alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextSection {
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub min_fraction: f64,
    pub min_count: usize,
    pub cim: ForestParams,
}

impl Default for ContextSection {
    fn default() -> Self {
        let km = KMeansParams::default();
        let pr = PruneParams::default();
        Self { k: km.k, max_iter: km.max_iter, tol: km.tol, min_fraction: pr.min_fraction, min_count: pr.min_count, cim: ForestParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Impostor training windows per context; unset means the genuine count.
    pub impostor_cap: Option<usize>,
    pub min_impostor_matches: usize,
    pub min_windows: usize,
    pub fte_fractions: Vec<f64>,
    pub fte_ranking: FteRanking,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { impostor_cap: None, min_impostor_matches: 10, min_windows: 20, fte_fractions: vec![0.05, 0.10, 0.15], fte_ranking: FteRanking::default() }
    }
}

/// Where traces come from: a directory of CSV files, or a synthetic population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSection {
    pub trace_dir: Option<PathBuf>,
    pub n_users: usize,
    pub distinctiveness: f64,
    pub n_contexts: usize,
    pub attended_duration_ms: u64,
    pub unattended_fraction: f64,
    pub base_rate_hz: f64,
}

impl Default for PopulationSection {
    fn default() -> Self {
        let p = PopulationParams::default();
        Self {
            trace_dir: None,
            n_users: 8,
            distinctiveness: 0.8,
            n_contexts: p.n_contexts,
            attended_duration_ms: p.attended_duration_ms,
            unattended_fraction: p.unattended_fraction,
            base_rate_hz: p.base_rate_hz,
        }
    }
}

impl PopulationSection {
    pub fn params(&self) -> PopulationParams {
        PopulationParams {
            n_contexts: self.n_contexts,
            attended_duration_ms: self.attended_duration_ms,
            unattended_fraction: self.unattended_fraction,
            base_rate_hz: self.base_rate_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub preprocess: PreprocessSection,
    pub windows: WindowConfig,
    pub selection: SelectionSection,
    pub context: ContextSection,
    pub classifiers: ClassifierParams,
    pub eval: EvalSection,
    pub population: PopulationSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // Unknown or mistyped keys: report the innermost key when toml gives us one.
            let key = msg.split('`').nth(1).unwrap_or("config").to_string();
            invalid(&key, msg)
        })
    }

    /// Reads a TOML config, or the `config` object of a run manifest (`.json`).
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            let v: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
            let cfg = v.get("config").cloned().unwrap_or(v);
            return serde_json::from_value(cfg).map_err(|e| invalid("config", e.to_string()));
        }
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Canonical JSON used for hashing and for the manifest.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_json_value()).expect("config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn enroll_config(&self) -> EnrollConfig {
        EnrollConfig {
            thresholds: self.preprocess.thresholds,
            median_span: self.preprocess.median_span,
            window: self.windows,
            kmeans: KMeansParams { k: self.context.k, max_iter: self.context.max_iter, tol: self.context.tol },
            prune: PruneParams { min_fraction: self.context.min_fraction, min_count: self.context.min_count },
            cim: self.context.cim.clone(),
            cfs: CfsParams { frontier: self.selection.frontier, max_stale: self.selection.max_stale },
            classifiers: self.classifiers.clone(),
            impostor_cap: self.eval.impostor_cap,
            min_impostor_matches: self.eval.min_impostor_matches,
            min_windows: self.eval.min_windows,
            ks_alpha: self.selection.ks_alpha,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, key: &str, reason: &str| if ok { Ok(()) } else { Err(invalid(key, reason)) };

        let algs = &self.run.algorithms;
        check(!algs.is_empty(), "run.algorithms", "at least one algorithm is required")?;
        check((1..algs.len()).all(|i| !algs[..i].contains(&algs[i])), "run.algorithms", "duplicate algorithm")?;

        self.preprocess.thresholds.validate().map_err(|e| invalid("preprocess.thresholds", e.to_string()))?;
        check(self.preprocess.median_span % 2 == 1, "preprocess.median_span", "must be odd and positive")?;

        let w = &self.windows;
        check(w.win_ms > 0, "windows.win_ms", "must be positive")?;
        check(w.step_ms > 0, "windows.step_ms", "must be positive")?;
        check(w.min_samples >= 8, "windows.min_samples", "must be at least 8")?;
        check(w.max_gap_ms > 0, "windows.max_gap_ms", "must be positive")?;
        check(w.dtw_max_points >= 2, "windows.dtw_max_points", "must be at least 2")?;

        let s = &self.selection;
        check(s.frontier >= 1, "selection.frontier", "must be at least 1")?;
        check(s.max_stale >= 1, "selection.max_stale", "must be at least 1")?;
        check(s.ks_alpha > 0.0 && s.ks_alpha < 1.0, "selection.ks_alpha", "must lie in (0, 1)")?;

        let c = &self.context;
        check(c.k >= 1, "context.k", "must be at least 1")?;
        check(c.max_iter >= 1, "context.max_iter", "must be at least 1")?;
        check(c.tol >= 0.0, "context.tol", "must be non-negative")?;
        check((0.0..=1.0).contains(&c.min_fraction), "context.min_fraction", "must lie in [0, 1]")?;
        check(c.cim.trees >= 1, "context.cim.trees", "must be at least 1")?;
        check(c.cim.min_node_size >= 1, "context.cim.min_node_size", "must be at least 1")?;
        check(c.cim.mtry != Some(0), "context.cim.mtry", "must be at least 1")?;

        let p = &self.classifiers;
        check(p.logreg.lambda >= 0.0, "classifiers.logreg.lambda", "must be non-negative")?;
        check(p.logreg.max_iter >= 1, "classifiers.logreg.max_iter", "must be at least 1")?;
        check(p.logreg.tol > 0.0, "classifiers.logreg.tol", "must be positive")?;
        check(p.mlp.hidden >= 1, "classifiers.mlp.hidden", "must be at least 1")?;
        check(p.mlp.learning_rate > 0.0, "classifiers.mlp.learning_rate", "must be positive")?;
        check(p.mlp.epochs >= 1, "classifiers.mlp.epochs", "must be at least 1")?;
        check(p.mlp.init_range > 0.0, "classifiers.mlp.init_range", "must be positive")?;
        check(p.knn.k >= 1, "classifiers.knn.k", "must be at least 1")?;
        check(p.svm.c > 0.0, "classifiers.svm.c", "must be positive")?;
        check(p.svm.gamma.is_none_or(|g| g > 0.0), "classifiers.svm.gamma", "must be positive")?;
        check(p.svm.tol > 0.0, "classifiers.svm.tol", "must be positive")?;
        check(p.svm.max_passes >= 1, "classifiers.svm.max_passes", "must be at least 1")?;
        check(p.rf.trees >= 1, "classifiers.rf.trees", "must be at least 1")?;
        check(p.rf.min_node_size >= 1, "classifiers.rf.min_node_size", "must be at least 1")?;
        check(p.rf.mtry != Some(0), "classifiers.rf.mtry", "must be at least 1")?;

        let e = &self.eval;
        check(e.impostor_cap != Some(0), "eval.impostor_cap", "must be at least 1")?;
        check(e.min_impostor_matches >= 1, "eval.min_impostor_matches", "must be at least 1")?;
        check(e.min_windows >= 4, "eval.min_windows", "must be at least 4")?;
        check(e.fte_fractions.iter().all(|f| (0.0..1.0).contains(f)), "eval.fte_fractions", "fractions must lie in [0, 1)")?;

        let pop = &self.population;
        check(pop.n_users >= 2, "population.n_users", "must be at least 2")?;
        check((0.0..=1.0).contains(&pop.distinctiveness), "population.distinctiveness", "must lie in [0, 1]")?;
        check(pop.n_contexts >= 1, "population.n_contexts", "must be at least 1")?;
        check(pop.attended_duration_ms > 0, "population.attended_duration_ms", "must be positive")?;
        check((0.0..1.0).contains(&pop.unattended_fraction), "population.unattended_fraction", "must lie in [0, 1)")?;
        check((8.0..=36.0).contains(&pop.base_rate_hz), "population.base_rate_hz", "must lie in [8, 36]")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        assert_eq!(c.context.k, 8);
        assert_eq!(c.windows.win_ms, 10_000);
        assert_eq!(c.preprocess.thresholds.lz, -0.22);
        assert_eq!(c.classifiers.knn.k, 10);
    }

    #[test]
    fn zero_k_is_rejected_with_its_key() {
        let c = RunConfig::from_toml("[context]\nk = 0\n").unwrap();
        assert_eq!(c.validate().unwrap_err().key(), Some("context.k"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[context]\nclusters = 3\n").is_err());
    }

    #[test]
    fn toml_round_trip_and_hash() {
        let mut c = RunConfig::default();
        c.run.seed = 7;
        c.run.algorithms = vec![Algorithm::Rf, Algorithm::Svm];
        c.eval.impostor_cap = Some(50);
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(RunConfig::default().hash(), c.hash());
    }

    #[test]
    fn sections_parse() {
        let text = "[run]\nseed = 3\nalgorithms = [\"RF\", \"KNN\"]\n[classifiers.svm]\nc = 2.0\n[population]\nn_users = 4\n";
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.run.seed, 3);
        assert_eq!(c.run.algorithms, vec![Algorithm::Rf, Algorithm::Knn]);
        assert_eq!(c.classifiers.svm.c, 2.0);
        assert_eq!(c.population.n_users, 4);
        let e = c.enroll_config();
        assert_eq!(e.kmeans.k, 8);
    }
}
