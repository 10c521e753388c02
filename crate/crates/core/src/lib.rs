//! Context-aware continuous authentication from smartphone accelerometer traces.
//!
//! The pipeline runs in a fixed order: unattended-segment removal and median
//! filtering ([`preprocess`]), 10 s / 5 s windowing and a 110-component feature
//! vector per window ([`features`]), per-user context discovery with k-means and
//! a Random-Forest context identification model ([`context`]), one
//! authentication model per retained context ([`classifiers`]), and EER-based
//! evaluation with nonparametric classifier comparison ([`eval`], [`stats`]).
//! [`synth`] produces labelled synthetic populations to drive all of it.

// `!(x > 0.0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod config;
pub mod context;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod profile;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod trace;

pub use classifiers::{Algorithm, AuthModel};
pub use config::RunConfig;
pub use features::{WindowFeatures, FEATURE_DIM};
pub use profile::UserProfile;
pub use trace::{AccelSample, AccelTrace};
