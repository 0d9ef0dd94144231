//! Whole-experiment configuration.
//!
//! One JSON document captures every input and every seed of a run, so a
//! report can be reproduced from its embedded config echo alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::SyntheticSpec;
use crate::error::{Error, Result};
use crate::labels::Strategy;
use crate::model::{Arch, FeaturizerConfig, TrainConfig};
use crate::textprep::PrepConfig;

/// Where the corpus comes from: generated in-process or read from files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusSource {
    Synthetic(SyntheticSpec),
    Files { reports: PathBuf, labels: PathBuf },
}

impl Default for CorpusSource {
    fn default() -> Self {
        CorpusSource::Synthetic(SyntheticSpec::default())
    }
}

/// Sampling settings for the two uncertainty methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UqConfig {
    /// Stochastic passes per study for MC dropout.
    pub mc_passes: usize,
    pub mc_seed: u64,
    /// Ensemble size; member i trains with seed `ensemble_base_seed + i`.
    pub ensemble_members: usize,
    pub ensemble_base_seed: u64,
}

impl Default for UqConfig {
    fn default() -> Self {
        UqConfig {
            mc_passes: 10,
            mc_seed: 101,
            ensemble_members: 10,
            ensemble_base_seed: 202,
        }
    }
}

/// Which data trains the models used for uncertainty sampling and the
/// final test evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyRegime {
    TrainOnly,
    TrainPlusValidation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Confidence margin for error mining: flagged studies need
    /// `|p̂ − 0.5| > tau`.
    pub tau: f64,
    pub kfold: usize,
    pub regime: UncertaintyRegime,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            tau: 0.45,
            kfold: 5,
            regime: UncertaintyRegime::TrainPlusValidation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    pub prep: PrepConfig,
    pub strategy: Strategy,
    pub arch: Arch,
    pub featurizer: FeaturizerConfig,
    pub train: TrainConfig,
    pub uq: UqConfig,
    pub analysis: AnalysisConfig,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: CorpusSource::default(),
            prep: PrepConfig::default(),
            strategy: Strategy::URandom { seed: 7 },
            arch: Arch::default(),
            featurizer: FeaturizerConfig::default(),
            train: TrainConfig::default(),
            uq: UqConfig::default(),
            analysis: AnalysisConfig::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("bad config file {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let CorpusSource::Synthetic(spec) = &self.corpus {
            spec.validate()?;
        }
        self.arch.validate()?;
        self.train.validate()?;
        if self.featurizer.dim != self.arch.input_dim {
            return Err(Error::validation(format!(
                "featurizer dim {} must equal arch input_dim {}",
                self.featurizer.dim, self.arch.input_dim
            )));
        }
        if self.uq.mc_passes < 2 {
            return Err(Error::validation("mc_passes must be at least 2"));
        }
        if self.uq.ensemble_members < 2 {
            return Err(Error::validation("ensemble_members must be at least 2"));
        }
        if !(self.analysis.tau > 0.0 && self.analysis.tau < 0.5) {
            return Err(Error::validation("tau must lie in (0, 0.5)"));
        }
        if self.analysis.kfold < 2 {
            return Err(Error::validation("kfold must be at least 2"));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_roundtrips() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let json = r#"{"strategy": {"kind": "u_ones"}, "uq": {"mc_passes": 4}}"#;
        let config: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(config.strategy, Strategy::UOnes);
        assert_eq!(config.uq.mc_passes, 4);
        assert_eq!(config.uq.ensemble_members, 10);
        config.validate().unwrap();
    }

    #[test]
    fn synthetic_source_uses_internal_tag() {
        let json = r#"{"corpus": {"kind": "synthetic", "n": 50, "seed": 3,
                        "mix": {"certain_positive": 1.0, "certain_negative": 0.0,
                                "explicit_uncertain": 0.0, "borderline_disagreement": 0.0},
                        "split_fractions": [0.8, 0.1, 0.1]}}"#;
        let config: ExperimentConfig = serde_json::from_str(json).unwrap();
        match &config.corpus {
            CorpusSource::Synthetic(spec) => {
                assert_eq!(spec.n, 50);
                assert_eq!(spec.mix.certain_positive, 1.0);
            }
            other => panic!("wrong source {other:?}"),
        }
    }

    #[test]
    fn mismatched_dims_rejected() {
        let mut config = ExperimentConfig::default();
        config.featurizer.dim = 1024;
        assert!(config.validate().is_err());
    }

    #[test]
    fn bad_tau_rejected() {
        let mut config = ExperimentConfig::default();
        config.analysis.tau = 0.5;
        assert!(config.validate().is_err());
    }
}
