//! Train the dropout classifier on a separable synthetic corpus, evaluate
//! it, and run k-fold cross-validation.
//!
//! ```sh
//! cargo run --release --example train_and_evaluate
//! ```

use hesitant::corpus::{generate_synthetic, partition, ScenarioMix};
use hesitant::labels::{binarise, Strategy, CHEXPERT_STREAM};
use hesitant::model::{
    cross_validate, evaluate, train, Arch, BinaryDataset, FeaturizerConfig, TrainConfig,
};
use hesitant::textprep::PrepConfig;

fn main() -> hesitant::Result<()> {
    let mix = ScenarioMix {
        certain_positive: 0.5,
        certain_negative: 0.5,
        explicit_uncertain: 0.0,
        borderline_disagreement: 0.0,
        random_noise: 0.0,
    };
    let studies = generate_synthetic(800, &mix, 21)?;

    let tri: Vec<_> = studies.iter().map(|s| s.chexpert).collect();
    let labels = binarise(&tri, &Strategy::UOnes, CHEXPERT_STREAM)?;
    let featurizer = FeaturizerConfig {
        dim: 1024,
        ..FeaturizerConfig::default()
    };
    let dataset = BinaryDataset::from_studies(&studies, &PrepConfig::default(), &featurizer, &labels)?;

    // Index-aligned split datasets.
    let (train_studies, _, test_studies) = partition(studies.clone());
    let index_of: std::collections::HashMap<&str, usize> = dataset
        .study_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let subset = |part: &[hesitant::corpus::LabelledStudy]| {
        let indices: Vec<usize> = part.iter().map(|s| index_of[s.study_id.as_str()]).collect();
        dataset.subset(&indices)
    };
    let train_data = subset(&train_studies);
    let test_data = subset(&test_studies);

    let arch = Arch {
        input_dim: 1024,
        hidden_dim: 32,
        dropout_rate: 0.2,
    };
    let config = TrainConfig {
        batch_size: 32,
        seed: 1,
        ..TrainConfig::default()
    };

    let (params, trace) = train(&train_data, &arch, &config)?;
    println!("epoch losses: {:?}", trace.epoch_losses);

    let metrics = evaluate(&params, &test_data, config.decision_threshold)?;
    println!(
        "test: accuracy {:.4}, precision {:?}, recall {:?}, f1 {:?}",
        metrics.accuracy, metrics.precision, metrics.recall, metrics.f1
    );

    let cv = cross_validate(&train_data, &arch, &config, 5)?;
    println!("5-fold mean accuracy: {:.4}", cv.mean.accuracy);
    for (i, fold) in cv.per_fold.iter().enumerate() {
        println!("  fold {i}: accuracy {:.4}", fold.accuracy);
    }
    Ok(())
}
