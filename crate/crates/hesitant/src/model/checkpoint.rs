//! Model checkpointing.
//!
//! Checkpoints are versioned JSON holding the architecture, every parameter
//! as a 64-bit real, and the training configuration (including its seed).
//! JSON numbers are written in shortest round-trip form, so save → load is
//! bit-exact for finite parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::MlpParams;
use super::TrainConfig;
use crate::error::{Error, Result};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub params: MlpParams,
    pub train_config: TrainConfig,
}

pub fn save_checkpoint(path: &Path, params: &MlpParams, config: &TrainConfig) -> Result<()> {
    let checkpoint = Checkpoint {
        format_version: CHECKPOINT_VERSION,
        params: params.clone(),
        train_config: *config,
    };
    let writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer(writer, &checkpoint)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let reader = BufReader::new(File::open(path)?);
    let checkpoint: Checkpoint = serde_json::from_reader(reader)?;
    if checkpoint.format_version != CHECKPOINT_VERSION {
        return Err(Error::validation(format!(
            "unsupported checkpoint version {}",
            checkpoint.format_version
        )));
    }
    Ok(checkpoint)
}
