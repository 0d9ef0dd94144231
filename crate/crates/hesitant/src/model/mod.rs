//! From-scratch binary classifier: hashed n-gram features, a feedforward
//! network with inverted dropout, cross-entropy loss, AdamW, and k-fold
//! cross-validation.

mod adamw;
mod checkpoint;
mod featurize;
mod kfold;
mod mlp;
mod train;

pub use adamw::{adamw_step, AdamWState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use featurize::{featurize, FeatureVector, FeaturizerConfig};
pub use kfold::{cross_validate, kfold_split, CrossValidation, MetricsSummary};
pub use mlp::{forward, loss_and_grad, predict, Gradients, MlpParams};
pub use train::{evaluate, train, BinaryDataset, TrainTrace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Network shape: `input_dim → hidden_dim → 1`, logistic output, dropout on
/// the hidden activations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Arch {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub dropout_rate: f64,
}

impl Default for Arch {
    fn default() -> Self {
        Arch {
            input_dim: 4096,
            hidden_dim: 64,
            dropout_rate: 0.2,
        }
    }
}

impl Arch {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 2 {
            return Err(Error::validation("input_dim must be at least 2"));
        }
        if self.hidden_dim < 1 {
            return Err(Error::validation("hidden_dim must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::validation("dropout_rate must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Forward-pass mode.
///
/// `Deterministic` applies no masking; with the inverted-dropout convention
/// (survivors scaled by `1/(1−rate)` during stochastic passes) deterministic
/// inference needs no rescale. `StochasticDropout` masks hidden activations
/// using streams derived from the carried seed, so a fixed seed reproduces
/// the same masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    Deterministic,
    StochasticDropout { seed: u64 },
}

/// Training hyperparameters. Every random decision in `train` derives from
/// `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub decision_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            weight_decay: 1e-4,
            epsilon: 1e-7,
            batch_size: 128,
            epochs: 3,
            seed: 0,
            decision_threshold: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::validation("learning_rate must be positive"));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::validation("weight_decay must be non-negative"));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::validation("epsilon must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be at least 1"));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::validation("decision_threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}
