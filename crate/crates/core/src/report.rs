//! CSV/JSON writers and the run directory layout.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eval::EvalResult;
use crate::features::{feature_names, WindowFeatures};
use crate::profile::UserProfile;

/// A fresh output directory `<out>/<UTC timestamp>_seed<seed>`; a numeric
/// suffix is appended if the name is taken, so earlier runs are never touched.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(out_dir: &Path, seed: u64) -> io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
        let base = format!("{stamp}_seed{seed}");
        let mut path = out_dir.join(&base);
        let mut n = 1;
        loop {
            match fs::create_dir(&path) {
                Ok(()) => return Ok(Self { path }),
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                    path = out_dir.join(format!("{base}_{n}"));
                    n += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> io::Result<PathBuf> {
        let p = self.file(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, contents)?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        self.write(name, text + "\n")
    }
}

/// `user_id,context,algorithm,n_genuine,n_impostor,eer,threshold,reused_impostors`.
pub fn results_csv(results: &[EvalResult]) -> String {
    let mut out = String::from("user_id,context,algorithm,n_genuine,n_impostor,eer,threshold,reused_impostors\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.user_id,
            r.context,
            r.algorithm,
            r.genuine_scores.len(),
            r.impostor_scores.len(),
            r.eer,
            r.threshold,
            r.reused_impostors
        );
    }
    out
}

/// One row per window: `user_id,start_ms` then the 110 named components.
pub fn features_csv(rows: &[WindowFeatures]) -> String {
    let mut out = String::from("user_id,start_ms");
    for n in feature_names() {
        out.push(',');
        out.push_str(&n);
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.user_id, r.start_ms);
        for v in &r.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Per-user cluster sizes: `user_id,cluster,count,retained,evaluated`.
pub fn clusters_csv(profiles: &[UserProfile]) -> String {
    let mut out = String::from("user_id,cluster,count,retained,evaluated\n");
    for p in profiles {
        for (c, n) in p.cluster_counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{}", p.user_id, c, n, p.retained.contains(&c), p.context(c).is_some());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedUser {
    pub user_id: String,
    pub stage: String,
    pub reason: String,
}

pub fn skipped_csv(skipped: &[SkippedUser]) -> String {
    let mut out = String::from("user_id,stage,reason\n");
    for s in skipped {
        let _ = writeln!(out, "{},{},\"{}\"", s.user_id, s.stage, s.reason.replace('"', "'"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub created_utc: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub users: Vec<String>,
    pub skipped: Vec<SkippedUser>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &crate::config::RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            seed: config.run.seed,
            config_hash: config.hash(),
            config: config.to_json_value(),
            users: Vec::new(),
            skipped: Vec::new(),
            outputs: Vec::new(),
        }
    }
}
