//! Run manifest written next to the artifacts.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use speclab_core::DomainSpec;

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::jobs::Outcome;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Versions {
    pub speclab: String,
    pub speclab_core: String,
}

impl Versions {
    pub fn current() -> Self {
        Self { speclab: env!("CARGO_PKG_VERSION").to_string(), speclab_core: speclab_core::VERSION.to_string() }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Manifest {
    pub schema_version: u32,
    pub config: RunConfig,
    pub domain: Option<DomainSpec>,
    pub versions: Versions,
    pub threads: usize,
    pub artifacts: Vec<String>,
    pub summary: Value,
    pub failure: Option<String>,
    pub wall_time_seconds: f64,
}

impl Manifest {
    pub fn new(config: &RunConfig, outcome: &Outcome, threads: usize, wall_time_seconds: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            domain: outcome.domain.clone(),
            versions: Versions::current(),
            threads,
            artifacts: outcome.artifacts.iter().map(|a| a.name.clone()).collect(),
            summary: outcome.summary.clone(),
            failure: outcome.failure.clone(),
            wall_time_seconds,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).context("invalid manifest")
    }
}

/// Writes every artifact and the manifest under `dir`.
pub fn write_run(dir: &Path, outcome: &Outcome, manifest: &Manifest) -> Result<()> {
    for a in &outcome.artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        std::fs::write(&path, &a.bytes).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}
