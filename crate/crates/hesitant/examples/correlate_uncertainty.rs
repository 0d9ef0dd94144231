//! Point-biserial correlation between uncertainty measures and linguistic
//! indicators, compared across the three binarisation strategies.
//!
//! ```sh
//! cargo run --release --example correlate_uncertainty
//! ```

use hesitant::analysis::run_experiment;
use hesitant::config::{CorpusSource, ExperimentConfig};
use hesitant::corpus::{ScenarioMix, SyntheticSpec};
use hesitant::labels::Strategy;
use hesitant::stats::CorrelationResult;

fn cell(c: &Option<CorrelationResult>) -> String {
    match c {
        Some(c) => format!("{:+.3} (p={:.4})", c.r_pb, c.p_value),
        None => "absent".into(),
    }
}

fn main() -> hesitant::Result<()> {
    println!("strategy   method            tld                chex_uncertain     neg_uncertain");
    for strategy in [
        Strategy::URandom { seed: 7 },
        Strategy::UOnes,
        Strategy::UZeros,
    ] {
        let mut config = ExperimentConfig {
            corpus: CorpusSource::Synthetic(SyntheticSpec {
                n: 800,
                seed: 42,
                mix: ScenarioMix::default(),
                split_fractions: [0.7, 0.1, 0.2],
            }),
            strategy,
            ..ExperimentConfig::default()
        };
        config.arch.input_dim = 1024;
        config.arch.hidden_dim = 32;
        config.featurizer.dim = 1024;
        config.train.batch_size = 32;
        config.uq.mc_passes = 10;
        config.uq.ensemble_members = 5;
        config.analysis.kfold = 2;

        let artifacts = run_experiment(&config)?;
        let uncertainty = artifacts.report.uncertainty.expect("test split present");
        let table = &uncertainty.pe_correlations;
        for (method, cells) in [
            ("mc_dropout", &table.mc_dropout),
            ("deep_ensembles", &table.deep_ensembles),
        ] {
            println!(
                "{:<10} {:<16} {:<18} {:<18} {:<18}",
                strategy.name(),
                method,
                cell(&cells.tld),
                cell(&cells.chex_uncertain),
                cell(&cells.neg_uncertain)
            );
        }
    }
    println!(
        "\nPE correlations track the uncertain flags only when uncertain labels\n\
         were binarised by coin flip; forcing them all positive or all negative\n\
         teaches the model to be confident on hedged text and the signal vanishes."
    );
    Ok(())
}
