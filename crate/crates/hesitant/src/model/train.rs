//! Dataset assembly, the training loop, and deterministic evaluation.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::adamw::{adamw_step, AdamWState};
use super::featurize::FeaturizerConfig;
use super::mlp::{loss_and_grad, predict, MlpParams};
use super::{Arch, ForwardMode, TrainConfig};
use crate::corpus::LabelledStudy;
use crate::error::{Error, Result};
use crate::labels::BinaryLabel;
use crate::rng;
use crate::stats::{classification_metrics, ClassificationMetrics};
use crate::textprep::{preprocess, PrepConfig};

/// Feature rows plus binary targets, stored as one flat row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    pub study_ids: Vec<String>,
    dim: usize,
    rows: Vec<f64>,
    pub labels: Vec<bool>,
}

impl BinaryDataset {
    pub fn new(dim: usize) -> Self {
        BinaryDataset {
            study_ids: Vec::new(),
            dim,
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, study_id: String, features: &[f64], label: BinaryLabel) {
        assert_eq!(features.len(), self.dim, "feature dimension mismatch");
        self.study_ids.push(study_id);
        self.rows.extend_from_slice(features);
        self.labels.push(label == BinaryLabel::Positive);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> BinaryLabel {
        if self.labels[i] {
            BinaryLabel::Positive
        } else {
            BinaryLabel::Negative
        }
    }

    pub fn subset(&self, indices: &[usize]) -> BinaryDataset {
        let mut out = BinaryDataset::new(self.dim);
        for &i in indices {
            out.study_ids.push(self.study_ids[i].clone());
            out.rows.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    /// Preprocess and featurize a set of studies against provided binary
    /// targets (one per study, in order).
    pub fn from_studies(
        studies: &[LabelledStudy],
        prep: &PrepConfig,
        featurizer: &FeaturizerConfig,
        labels: &[BinaryLabel],
    ) -> Result<BinaryDataset> {
        if studies.len() != labels.len() {
            return Err(Error::validation("study/label length mismatch"));
        }
        let features: Vec<Vec<f64>> = studies
            .par_iter()
            .map(|study| {
                let tokens = preprocess(&study.text, prep);
                featurizer.features(&tokens).map(|fv| fv.values().to_vec())
            })
            .collect::<Result<_>>()?;
        let mut dataset = BinaryDataset::new(featurizer.dim);
        for ((study, row), &label) in studies.iter().zip(&features).zip(labels) {
            dataset.push(study.study_id.clone(), row, label);
        }
        Ok(dataset)
    }
}

/// Per-epoch mean training loss plus any warnings raised during the run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub epoch_losses: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Train a dropout MLP with AdamW. Pure function of `(data, arch, config)`:
/// initialization, shuffling, and dropout masks all derive from
/// `config.seed`.
pub fn train(
    data: &BinaryDataset,
    arch: &Arch,
    config: &TrainConfig,
) -> Result<(MlpParams, TrainTrace)> {
    arch.validate()?;
    config.validate()?;
    if data.is_empty() {
        return Err(Error::validation("training data is empty"));
    }
    if data.dim() != arch.input_dim {
        return Err(Error::validation(format!(
            "dataset dimension {} does not match arch input_dim {}",
            data.dim(),
            arch.input_dim
        )));
    }

    let mut trace = TrainTrace::default();
    if data.labels.iter().all(|&l| l) || data.labels.iter().all(|&l| !l) {
        trace
            .warnings
            .push("training data contains a single class".to_string());
    }

    let mut params = MlpParams::init(*arch, rng::mix(config.seed, &[0]));
    let mut state = AdamWState::new(&params);
    let n = data.len();

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(config.seed, &[1, epoch as u64]));

        let mut epoch_loss = 0.0;
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| data.row(i)).collect();
            let ys: Vec<bool> = batch.iter().map(|&i| data.labels[i]).collect();
            let mode = if arch.dropout_rate > 0.0 {
                ForwardMode::StochasticDropout {
                    seed: rng::mix(config.seed, &[2, epoch as u64, step as u64]),
                }
            } else {
                ForwardMode::Deterministic
            };
            let (loss, grads) = loss_and_grad(&params, &xs, &ys, mode)?;
            adamw_step(&mut state, &mut params, &grads, config);
            epoch_loss += loss * batch.len() as f64;
        }
        trace.epoch_losses.push(epoch_loss / n as f64);
    }

    Ok((params, trace))
}

/// Deterministic-mode metrics of a model over a dataset.
pub fn evaluate(
    params: &MlpParams,
    data: &BinaryDataset,
    threshold: f64,
) -> Result<ClassificationMetrics> {
    if data.is_empty() {
        return Err(Error::validation("evaluation data is empty"));
    }
    let predictions: Vec<BinaryLabel> = (0..data.len())
        .into_par_iter()
        .map(|i| predict(params, data.row(i), threshold).map(|(_, label)| label))
        .collect::<Result<_>>()?;
    let truth: Vec<BinaryLabel> = (0..data.len()).map(|i| data.label(i)).collect();
    classification_metrics(&predictions, &truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, ScenarioMix};
    use crate::labels::{binarise, Strategy, CHEXPERT_STREAM};

    fn separable_dataset(n: usize, seed: u64) -> BinaryDataset {
        let mix = ScenarioMix {
            certain_positive: 0.5,
            certain_negative: 0.5,
            explicit_uncertain: 0.0,
            borderline_disagreement: 0.0,
            random_noise: 0.0,
        };
        let studies = generate_synthetic(n, &mix, seed).unwrap();
        let tri: Vec<_> = studies.iter().map(|s| s.chexpert).collect();
        let labels = binarise(&tri, &Strategy::UOnes, CHEXPERT_STREAM).unwrap();
        let featurizer = FeaturizerConfig {
            dim: 512,
            ..FeaturizerConfig::default()
        };
        BinaryDataset::from_studies(&studies, &PrepConfig::default(), &featurizer, &labels)
            .unwrap()
    }

    fn small_arch() -> Arch {
        Arch {
            input_dim: 512,
            hidden_dim: 16,
            dropout_rate: 0.2,
        }
    }

    #[test]
    fn training_is_bit_deterministic() {
        let data = separable_dataset(120, 3);
        let arch = small_arch();
        let config = TrainConfig {
            epochs: 2,
            batch_size: 32,
            seed: 5,
            ..TrainConfig::default()
        };
        let (a, trace_a) = train(&data, &arch, &config).unwrap();
        let (b, trace_b) = train(&data, &arch, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace_a, trace_b);
    }

    #[test]
    fn separable_data_reaches_high_train_accuracy() {
        let data = separable_dataset(400, 8);
        let arch = small_arch();
        let config = TrainConfig {
            seed: 1,
            ..TrainConfig::default()
        };
        let (params, trace) = train(&data, &arch, &config).unwrap();
        assert!(trace.warnings.is_empty());
        let metrics = evaluate(&params, &data, config.decision_threshold).unwrap();
        assert!(
            metrics.accuracy >= 0.95,
            "train accuracy {} below 0.95",
            metrics.accuracy
        );
    }

    #[test]
    fn median_epoch_losses_non_increasing_on_separable_data() {
        let data = separable_dataset(300, 10);
        let arch = small_arch();
        let mut per_epoch: Vec<Vec<f64>> = vec![Vec::new(); 3];
        for seed in 0..5 {
            let config = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let (_, trace) = train(&data, &arch, &config).unwrap();
            for (e, &loss) in trace.epoch_losses.iter().enumerate() {
                per_epoch[e].push(loss);
            }
        }
        let median = |values: &mut Vec<f64>| {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values[values.len() / 2]
        };
        let medians: Vec<f64> = per_epoch.iter_mut().map(median).collect();
        assert!(
            medians.windows(2).all(|w| w[1] <= w[0]),
            "medians increased: {medians:?}"
        );
    }

    #[test]
    fn single_class_data_warns_but_trains() {
        let mix = ScenarioMix {
            certain_positive: 1.0,
            certain_negative: 0.0,
            explicit_uncertain: 0.0,
            borderline_disagreement: 0.0,
            random_noise: 0.0,
        };
        let studies = generate_synthetic(60, &mix, 2).unwrap();
        let labels = vec![BinaryLabel::Positive; 60];
        let featurizer = FeaturizerConfig {
            dim: 512,
            ..FeaturizerConfig::default()
        };
        let data =
            BinaryDataset::from_studies(&studies, &PrepConfig::default(), &featurizer, &labels)
                .unwrap();
        let (_, trace) = train(&data, &small_arch(), &TrainConfig::default()).unwrap();
        assert_eq!(trace.warnings.len(), 1);
    }

    #[test]
    fn zero_init_model_predicts_constant_positive() {
        // An untrained all-zeros model outputs exactly 0.5 everywhere, which
        // the tie rule maps to Positive; on balanced data accuracy sits near
        // one half.
        let data = separable_dataset(1000, 21);
        let params = MlpParams::zeros(small_arch());
        let metrics = evaluate(&params, &data, 0.5).unwrap();
        let positive_fraction =
            data.labels.iter().filter(|&&l| l).count() as f64 / data.len() as f64;
        assert_eq!(metrics.accuracy, positive_fraction);
        assert!((metrics.accuracy - 0.5).abs() <= 0.05);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let data = separable_dataset(10, 1);
        let arch = Arch {
            input_dim: 128,
            ..small_arch()
        };
        assert!(train(&data, &arch, &TrainConfig::default()).is_err());
    }
}
