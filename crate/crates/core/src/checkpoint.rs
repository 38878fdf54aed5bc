//! Model checkpoints: one self-describing JSON document carrying every
//! dimension, all weights (adapters included), the class-name mapping, and
//! the seed the run was built from. `format_version` guards future changes.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trainer::Model;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub seed: u64,
    pub class_names: Vec<String>,
    pub model: Model,
}

impl Checkpoint {
    pub fn new(seed: u64, class_names: Vec<String>, model: Model) -> Self {
        Checkpoint { format_version: CHECKPOINT_VERSION, seed, class_names, model }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Checkpoint(format!("serialize failed: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("parse failed: {e}")))?;
        if ckpt.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ckpt.format_version
            )));
        }
        if ckpt.class_names.len() != ckpt.model.n_classes() {
            return Err(Error::Checkpoint(format!(
                "checkpoint lists {} class names but the model has {} outputs",
                ckpt.class_names.len(),
                ckpt.model.n_classes()
            )));
        }
        ckpt.model.validate()?;
        Ok(ckpt)
    }
}
