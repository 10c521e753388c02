//! Enrollment output for one user and its JSON persistence.
//!
//! A profile is a single JSON document carrying an explicit `schema_version`.
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! loaded profile scores every vector bit-identically to the saved one.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{Algorithm, AuthModel, ClassifierError};
use crate::context::{nearest_allowed_centroid, ContextModel};
use crate::features::{FeatureSubset, MinMaxNormalizer, WindowConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("profile serialization failed: {0}")]
    Serialization(String),
    #[error("unsupported profile schema version {found} (expected {expected})")]
    SchemaVersionMismatch { found: String, expected: u32 },
    #[error("profile has no model for {0}")]
    MissingAlgorithm(Algorithm),
    #[error("expected a {expected}-component vector, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Feature subset and trained models for one retained context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextProfile {
    pub context: usize,
    pub subset: FeatureSubset,
    pub n_genuine: usize,
    pub n_impostor: usize,
    pub models: Vec<AuthModel>,
}

impl ContextProfile {
    pub fn model(&self, algorithm: Algorithm) -> Option<&AuthModel> {
        self.models.iter().find(|m| m.algorithm == algorithm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnevaluableContext {
    pub context: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub schema_version: u32,
    pub user_id: String,
    pub seed: u64,
    pub window: WindowConfig,
    pub normalizer: MinMaxNormalizer,
    pub centroids: Vec<Vec<f64>>,
    pub cluster_counts: Vec<usize>,
    pub retained: Vec<usize>,
    pub cim: ContextModel,
    /// Retained contexts holding models, ascending by id.
    pub contexts: Vec<ContextProfile>,
    pub unevaluable: Vec<UnevaluableContext>,
    /// Start times of the candidate windows used for training.
    pub train_window_starts: Vec<u64>,
    pub impostor_training_users: Vec<String>,
    /// Fraction of normalized training columns for which normality was rejected.
    pub ks_rejection_fraction: f64,
}

impl UserProfile {
    pub fn algorithms(&self) -> Vec<Algorithm> {
        self.contexts.first().map(|c| c.models.iter().map(|m| m.algorithm).collect()).unwrap_or_default()
    }

    pub fn context(&self, id: usize) -> Option<&ContextProfile> {
        self.contexts.iter().find(|c| c.context == id)
    }

    pub fn normalize(&self, raw: &[f64]) -> Result<Vec<f64>, ProfileError> {
        if raw.len() != self.normalizer.dim() {
            return Err(ProfileError::DimensionMismatch { expected: self.normalizer.dim(), got: raw.len() });
        }
        Ok(self.normalizer.apply(raw))
    }

    /// Context whose models handle `normalized`: the CIM prediction when that
    /// context has models, otherwise the nearest centroid among those that do.
    pub fn route(&self, normalized: &[f64]) -> usize {
        let predicted = self.cim.predict_context(normalized);
        if self.context(predicted).is_some() {
            return predicted;
        }
        let allowed: Vec<usize> = self.contexts.iter().map(|c| c.context).collect();
        nearest_allowed_centroid(normalized, &self.centroids, &allowed).unwrap_or(predicted)
    }

    /// Routes and scores an already normalized vector; returns `(context, score)`.
    pub fn score_normalized(&self, normalized: &[f64], algorithm: Algorithm) -> Result<(usize, f64), ProfileError> {
        let ctx = self.route(normalized);
        let model = self
            .context(ctx)
            .and_then(|c| c.model(algorithm))
            .ok_or(ProfileError::MissingAlgorithm(algorithm))?;
        Ok((ctx, model.score(normalized)?))
    }

    /// Scores a raw 110-component feature vector.
    pub fn score(&self, raw: &[f64], algorithm: Algorithm) -> Result<(usize, f64), ProfileError> {
        self.score_normalized(&self.normalize(raw)?, algorithm)
    }

    pub fn to_json(&self) -> Result<String, ProfileError> {
        serde_json::to_string(self).map_err(|e| ProfileError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ProfileError::Serialization(e.to_string()))?;
        match value.get("schema_version") {
            Some(v) if v.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
            Some(v) => return Err(ProfileError::SchemaVersionMismatch { found: v.to_string(), expected: SCHEMA_VERSION }),
            None => return Err(ProfileError::SchemaVersionMismatch { found: "none".into(), expected: SCHEMA_VERSION }),
        }
        serde_json::from_value(value).map_err(|e| ProfileError::Serialization(e.to_string()))
    }
}

pub fn save_profile(profile: &UserProfile, path: &Path) -> Result<(), ProfileError> {
    fs::write(path, profile.to_json()?).map_err(|source| ProfileError::Io { path: path.display().to_string(), source })
}

pub fn load_profile(path: &Path) -> Result<UserProfile, ProfileError> {
    let text = fs::read_to_string(path).map_err(|source| ProfileError::Io { path: path.display().to_string(), source })?;
    UserProfile::from_json(&text)
}
