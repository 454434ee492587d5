use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, SCHEMA_VERSION};
use super::records::save_json;
use super::stats::RMSE_CI_METHOD;

/// Layout identifier of the random streams; changes whenever a seed would
/// stop reproducing earlier output.
pub const STREAM_LAYOUT: &str = "philox4x32-10 slot key + splitmix64, v1";

/// Provenance written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub schema_version: u32,
    /// SHA-256 of the resolved configuration serialized as JSON.
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub stream_layout: String,
    pub rmse_ci_method: String,
    pub outputs: Vec<String>,
    pub config: ExperimentConfig,
}

pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg).map_err(|e| Error::Serialization(e.to_string()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl Manifest {
    pub fn new(command: &str, cfg: &ExperimentConfig, outputs: Vec<String>) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            schema_version: SCHEMA_VERSION,
            config_sha256: config_hash(cfg)?,
            seed: cfg.seed,
            threads: rayon::current_num_threads(),
            stream_layout: STREAM_LAYOUT.into(),
            rmse_ci_method: RMSE_CI_METHOD.into(),
            outputs,
            config: cfg.clone(),
        })
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        save_json(&dir.join("manifest.json"), self)
    }
}
