//! Per-invocation output directory with a reproducibility manifest.
//!
//! Every run writes into a fresh directory; prior results are never mutated.
//! Primary outputs (CSV, Markdown, SVG) are byte-deterministic for fixed
//! inputs; wall-clock information is confined to the manifest.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct Manifest {
    tool: String,
    version: String,
    command: Vec<String>,
    config_sha256: Option<String>,
    seeds: Vec<u64>,
    created_at: String,
    outputs: Vec<String>,
}

pub struct OutputDir {
    root: PathBuf,
    command: Vec<String>,
    config_sha256: Option<String>,
    seeds: Vec<u64>,
    outputs: Vec<String>,
}

impl OutputDir {
    /// Create the directory, failing if it already exists non-empty.
    pub fn create(path: &Path) -> Result<Self> {
        if path.exists() {
            let non_empty = std::fs::read_dir(path)
                .with_context(|| format!("inspecting {}", path.display()))?
                .next()
                .is_some();
            if non_empty {
                bail!(
                    "output directory {} already exists and is not empty",
                    path.display()
                );
            }
        } else {
            std::fs::create_dir_all(path)
                .with_context(|| format!("creating {}", path.display()))?;
        }
        Ok(OutputDir {
            root: path.to_path_buf(),
            command: std::env::args().collect(),
            config_sha256: None,
            seeds: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn set_config_hash(&mut self, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        self.config_sha256 = Some(hex_string(&hasher.finalize()));
    }

    pub fn set_seeds(&mut self, seeds: &[u64]) {
        self.seeds = seeds.to_vec();
    }

    /// Write a primary (deterministic) output file.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    /// Finalize the manifest; the only file carrying a timestamp.
    pub fn finish(mut self) -> Result<()> {
        self.outputs.sort();
        let manifest = Manifest {
            tool: "nakasim".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            config_sha256: self.config_sha256,
            seeds: self.seeds,
            created_at: chrono::Utc::now().to_rfc3339(),
            outputs: self.outputs,
        };
        let path = self.root.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, body)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolve the output directory: explicit flag, or a generated name under
/// the output root (`NAKASIM_OUT_ROOT` or `./runs`).
pub fn resolve_out_dir(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    let root = std::env::var_os("NAKASIM_OUT_ROOT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(default_name)
}
