//! Seeded k-fold splitting and cross-validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{evaluate, train, BinaryDataset};
use super::{Arch, TrainConfig};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::ClassificationMetrics;

/// Split `0..n` into `k` disjoint, covering folds whose sizes differ by at
/// most one, after a seeded shuffle.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::validation("k must be at least 2"));
    }
    if n < k {
        return Err(Error::validation(format!(
            "cannot split {n} items into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng::stream(seed, &[]));

    let base = n / k;
    let remainder = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < remainder);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Mean of per-fold metrics; a ratio undefined in every fold stays absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub k: usize,
    pub per_fold: Vec<ClassificationMetrics>,
    pub mean: MetricsSummary,
}

/// Train on the complement of each fold and evaluate on the fold.
///
/// Fold models train concurrently; member `i` derives its seed from
/// `(config.seed, i)` so results do not depend on scheduling.
pub fn cross_validate(
    data: &BinaryDataset,
    arch: &Arch,
    config: &TrainConfig,
    k: usize,
) -> Result<CrossValidation> {
    let folds = kfold_split(data.len(), k, rng::mix(config.seed, &[100]))?;

    let per_fold: Vec<ClassificationMetrics> = folds
        .par_iter()
        .enumerate()
        .map(|(fold_idx, fold)| {
            let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
            let train_indices: Vec<usize> =
                (0..data.len()).filter(|i| !in_fold.contains(i)).collect();
            let fold_config = TrainConfig {
                seed: rng::mix(config.seed, &[101, fold_idx as u64]),
                ..*config
            };
            let (params, _) = train(&data.subset(&train_indices), arch, &fold_config)?;
            evaluate(&params, &data.subset(fold), config.decision_threshold)
        })
        .collect::<Result<_>>()?;

    let mean_of = |extract: fn(&ClassificationMetrics) -> Option<f64>| {
        let defined: Vec<f64> = per_fold.iter().filter_map(extract).collect();
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
    };
    let mean = MetricsSummary {
        accuracy: per_fold.iter().map(|m| m.accuracy).sum::<f64>() / per_fold.len() as f64,
        precision: mean_of(|m| m.precision),
        recall: mean_of(|m| m.recall),
        f1: mean_of(|m| m.f1),
    };

    Ok(CrossValidation { k, per_fold, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn even_split_sizes() {
        let folds = kfold_split(10, 5, 1).unwrap();
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().all(|f| f.len() == 2));
    }

    #[test]
    fn uneven_split_sizes_differ_by_at_most_one() {
        let folds = kfold_split(11, 5, 1).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
    }

    #[test]
    fn same_seed_same_folds() {
        assert_eq!(kfold_split(23, 4, 9).unwrap(), kfold_split(23, 4, 9).unwrap());
        assert_ne!(kfold_split(23, 4, 9).unwrap(), kfold_split(23, 4, 10).unwrap());
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(kfold_split(3, 5, 0).is_err());
        assert!(kfold_split(10, 1, 0).is_err());
    }

    #[test]
    fn folds_are_disjoint_and_covering() {
        let mut rng = crate::rng::stream(6, &[]);
        for _ in 0..50 {
            let k = rng.gen_range(2..=8);
            let n = rng.gen_range(k..=300);
            let folds = kfold_split(n, k, rng.gen()).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            let max = folds.iter().map(Vec::len).max().unwrap();
            let min = folds.iter().map(Vec::len).min().unwrap();
            assert!(max - min <= 1);
        }
    }

    #[test]
    fn fold_metrics_stay_in_range() {
        use crate::corpus::{generate_synthetic, ScenarioMix};
        use crate::labels::{binarise, Strategy, CHEXPERT_STREAM};
        use crate::model::FeaturizerConfig;
        use crate::textprep::PrepConfig;

        let mix = ScenarioMix {
            certain_positive: 0.5,
            certain_negative: 0.5,
            explicit_uncertain: 0.0,
            borderline_disagreement: 0.0,
            random_noise: 0.0,
        };
        let studies = generate_synthetic(150, &mix, 4).unwrap();
        let tri: Vec<_> = studies.iter().map(|s| s.chexpert).collect();
        let labels = binarise(&tri, &Strategy::UOnes, CHEXPERT_STREAM).unwrap();
        let featurizer = FeaturizerConfig {
            dim: 256,
            ..FeaturizerConfig::default()
        };
        let data = BinaryDataset::from_studies(
            &studies,
            &PrepConfig::default(),
            &featurizer,
            &labels,
        )
        .unwrap();
        let arch = Arch {
            input_dim: 256,
            hidden_dim: 16,
            dropout_rate: 0.2,
        };
        // Small batches so each fold gets enough optimizer steps.
        let config = TrainConfig {
            batch_size: 16,
            ..TrainConfig::default()
        };
        let cv = cross_validate(&data, &arch, &config, 3).unwrap();
        assert_eq!(cv.per_fold.len(), 3);
        for fold in &cv.per_fold {
            assert!((0.0..=1.0).contains(&fold.accuracy));
            for metric in [fold.precision, fold.recall, fold.f1].into_iter().flatten() {
                assert!((0.0..=1.0).contains(&metric));
            }
        }
        assert!(cv.mean.accuracy >= 0.9, "cv accuracy {}", cv.mean.accuracy);
    }
}
