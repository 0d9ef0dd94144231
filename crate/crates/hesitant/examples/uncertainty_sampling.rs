//! Draw MC-dropout and deep-ensemble prediction samples from a trained
//! classifier and aggregate them into PE/PSD summaries and group means.
//!
//! ```sh
//! cargo run --release --example uncertainty_sampling
//! ```

use hesitant::config::{CorpusSource, ExperimentConfig};
use hesitant::corpus::{ScenarioMix, Split, SyntheticSpec};
use hesitant::labels::{binarise, compute_indicators, CHEXPERT_STREAM};
use hesitant::model::{train, BinaryDataset};
use hesitant::uq::{
    ensemble_predict, ensemble_train, group_means, mc_dropout_predict, summarize, GroupMeans,
    IndicatorField,
};

fn main() -> hesitant::Result<()> {
    let mut config = ExperimentConfig {
        corpus: CorpusSource::Synthetic(SyntheticSpec {
            n: 800,
            seed: 33,
            mix: ScenarioMix::default(),
            split_fractions: [0.7, 0.1, 0.2],
        }),
        ..ExperimentConfig::default()
    };
    config.arch.input_dim = 1024;
    config.arch.hidden_dim = 32;
    config.featurizer.dim = 1024;
    config.train.batch_size = 32;

    let CorpusSource::Synthetic(spec) = &config.corpus else {
        unreachable!()
    };
    let studies = hesitant::corpus::generate(spec)?;
    let indicators = compute_indicators(&studies, &config.strategy)?;
    let tri: Vec<_> = studies.iter().map(|s| s.chexpert).collect();
    let targets = binarise(&tri, &config.strategy, CHEXPERT_STREAM)?;
    let dataset = BinaryDataset::from_studies(&studies, &config.prep, &config.featurizer, &targets)?;

    let split = |s: Split| -> Vec<usize> {
        studies
            .iter()
            .enumerate()
            .filter(|(_, st)| st.split == s)
            .map(|(i, _)| i)
            .collect()
    };
    let train_idx: Vec<usize> = split(Split::Train)
        .into_iter()
        .chain(split(Split::Validation))
        .collect();
    let test_idx = split(Split::Test);
    let train_data = dataset.subset(&train_idx);
    let test_data = dataset.subset(&test_idx);
    let test_indicators: Vec<_> = test_idx.iter().map(|&i| indicators[i].clone()).collect();

    // One model, many dropout masks.
    let (model, _) = train(&train_data, &config.arch, &config.train)?;
    let mc = mc_dropout_predict(&model, &test_data, config.uq.mc_passes, config.uq.mc_seed)?;

    // Many models, one deterministic pass each.
    let members = ensemble_train(
        &train_data,
        &config.arch,
        &config.train,
        config.uq.ensemble_members,
        config.uq.ensemble_base_seed,
    )?;
    let de = ensemble_predict(&members, &test_data)?;

    let threshold = config.train.decision_threshold;
    for (name, matrix) in [("mc_dropout", &mc), ("deep_ensembles", &de)] {
        let summaries = summarize(matrix, threshold);
        let high = summaries
            .iter()
            .max_by(|a, b| a.pe.partial_cmp(&b.pe).unwrap())
            .unwrap();
        println!(
            "{name}: {} studies x {} samples; most uncertain study {} (p̂ {:.3}, pe {:.3}, psd {:.3})",
            matrix.len(),
            matrix.samples_per_study(),
            high.study_id,
            high.mean_prob,
            high.pe,
            high.psd
        );

        let groups: GroupMeans = group_means(&summaries, &test_indicators, IndicatorField::Tld)?;
        let show = |tag: &str, g: Option<hesitant::uq::GroupMean>| match g {
            Some(g) => println!(
                "  {tag:<8} n={:<4} mean PE {:.4}  mean PSD {:.4}",
                g.count, g.mean_pe, g.mean_psd
            ),
            None => println!("  {tag:<8} (empty)"),
        };
        show("tld", groups.flagged);
        show("tla", groups.unflagged);
        show("overall", groups.overall);
    }
    Ok(())
}
