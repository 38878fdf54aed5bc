//! Run manifest: every input that determines the outputs (file digest,
//! resolved configuration, seed) plus artifact paths and wall-clock timings.
//! Re-running `qdress train` with the recorded configuration against the
//! recorded data reproduces the artifacts byte for byte.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use qdress_core::Result;

#[derive(Serialize)]
pub struct DataInfo {
    pub path: PathBuf,
    pub sha256: String,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub featurize_dim: Option<usize>,
}

#[derive(Serialize)]
pub struct SmoteInfo {
    pub enabled: bool,
    pub k_neighbors: usize,
}

#[derive(Serialize)]
pub struct LoraInfo {
    pub enabled: bool,
    pub rank: usize,
    pub alpha: f64,
    pub dropout: f64,
}

#[derive(Serialize)]
pub struct ResolvedConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: String,
    pub batch_size: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub smote: SmoteInfo,
    pub lora: LoraInfo,
}

#[derive(Serialize)]
pub struct Artifacts {
    pub metrics_csv: PathBuf,
    pub confusion_json: PathBuf,
    pub checkpoint_json: PathBuf,
}

#[derive(Serialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub train_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub started_unix_ms: u128,
    pub data: DataInfo,
    pub config: ResolvedConfig,
    pub artifacts: Artifacts,
    pub timings: Timings,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("serializable") + "\n")?;
        Ok(())
    }
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn unix_ms_now() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}
