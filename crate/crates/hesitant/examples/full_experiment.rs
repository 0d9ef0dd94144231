//! The whole pipeline in one call: synthetic corpus, binarisation, training,
//! both uncertainty methods, correlations, error mining, report emission.
//!
//! Equivalent to `hesitant all --config examples/exp.json --render`.
//!
//! ```sh
//! cargo run --release --example full_experiment
//! ```

use hesitant::analysis::{emit_report, render_report, run_experiment};
use hesitant::config::ExperimentConfig;

fn main() -> hesitant::Result<()> {
    let config_path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exp.json");
    let mut config = ExperimentConfig::load(std::path::Path::new(config_path))?;
    config.out_dir = std::env::temp_dir().join("hesitant_full_experiment");
    std::fs::create_dir_all(&config.out_dir)?;

    let artifacts = run_experiment(&config)?;
    print!("{}", render_report(&artifacts.report));

    let path = config.out_dir.join("report.json");
    emit_report(&artifacts.report, &path)?;
    println!("\nreport written to {}", path.display());

    // The confident-but-disputed cases surface the borderline wording.
    if let Some(case) = artifacts.report.errors.mc_dropout.first() {
        println!(
            "\nmost confident disputed study ({}, p̂ {:.3}):\n{}",
            case.study_id, case.mean_prob, case.excerpt
        );
    }
    Ok(())
}
