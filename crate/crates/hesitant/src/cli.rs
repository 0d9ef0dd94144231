//! Command-line surface.
//!
//! Subcommands mirror the pipeline stages: `gen`, `prep`, `train`, `sample`,
//! `eval`, `correlate`, `report`, and `all` for the whole run. Every
//! subcommand accepts `--config FILE`; flags override config fields, and the
//! effective configuration is echoed into the output directory. Exit codes:
//! 0 on success, 1 on validation/usage errors, 2 on i/o errors.
//!
//! `HESITANT_THREADS` caps worker parallelism (default: machine core count).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, emit_report, render_report, run_experiment};
use crate::config::{CorpusSource, ExperimentConfig, UncertaintyRegime};
use crate::corpus::{self, JoinSummary, LabelledStudy, Split};
use crate::error::{Error, Result};
use crate::labels::{binarise, compute_indicators, read_indicators_csv, write_indicators_csv, CHEXPERT_STREAM};
use crate::model::{
    cross_validate, load_checkpoint, save_checkpoint, train, BinaryDataset, MlpParams,
};
use crate::textprep::preprocess;
use crate::uq::{
    mc_dropout_predict, read_predictions_csv, summarize, write_predictions_csv,
    write_summaries_csv, SampleMatrix, SampleSource,
};

#[derive(Debug, Parser)]
#[command(
    name = "hesitant",
    about = "Relate a classifier's predictive uncertainty to the linguistic uncertainty in its corpus",
    version
)]
struct Cli {
    /// Experiment config file (JSON); flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's out_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus (reports.jsonl + labels.csv)
    Gen {
        /// Number of studies.
        #[arg(long)]
        n: Option<usize>,
        /// Generator seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tokenize and featurize the corpus; cache features and indicators
    Prep,
    /// Train the classifier on the regime split (optionally an ensemble)
    Train {
        /// Train M ensemble members instead of a single model.
        #[arg(long, value_name = "M")]
        ensemble: Option<usize>,
    },
    /// Draw prediction samples over the test split into predictions.csv
    Sample {
        #[arg(long, value_enum)]
        method: SampleMethod,
    },
    /// Single-run metrics, plus k-fold cross-validation with --kfold
    Eval {
        #[arg(long, value_name = "K")]
        kfold: Option<usize>,
    },
    /// Correlate a prediction matrix against indicators
    Correlate {
        /// Prediction matrix (defaults to <out>/predictions.csv).
        #[arg(long, value_name = "FILE")]
        predictions: Option<PathBuf>,
        /// Indicator table (defaults to <out>/indicators.csv).
        #[arg(long, value_name = "FILE")]
        indicators: Option<PathBuf>,
        /// Required sample-column count, or "all" to accept any width.
        #[arg(long, default_value = "all")]
        t: String,
    },
    /// Run the pipeline and assemble report.json
    Report {
        /// Also print human-readable tables.
        #[arg(long)]
        render: bool,
    },
    /// End-to-end run: corpus, training, sampling, correlation, report
    All {
        /// Also print human-readable tables.
        #[arg(long)]
        render: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleMethod {
    Mc,
    Ensemble,
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };

    init_thread_pool();

    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_thread_pool() {
    if let Some(n) = std::env::var("HESITANT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        // Ignore failure: the global pool may already exist in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }

    match cli.command {
        Command::Gen { n, seed } => {
            if let CorpusSource::Synthetic(spec) = &mut config.corpus {
                if let Some(n) = n {
                    spec.n = n;
                }
                if let Some(seed) = seed {
                    spec.seed = seed;
                }
            } else if n.is_some() || seed.is_some() {
                return Err(Error::validation(
                    "--n/--seed apply only to synthetic corpus configs",
                ));
            }
            config.validate()?;
            cmd_gen(&config)
        }
        Command::Prep => {
            config.validate()?;
            cmd_prep(&config)
        }
        Command::Train { ensemble } => {
            config.validate()?;
            cmd_train(&config, ensemble)
        }
        Command::Sample { method } => {
            config.validate()?;
            cmd_sample(&config, method)
        }
        Command::Eval { kfold } => {
            config.validate()?;
            cmd_eval(&config, kfold)
        }
        Command::Correlate {
            predictions,
            indicators,
            t,
        } => {
            config.validate()?;
            cmd_correlate(&config, predictions, indicators, &t)
        }
        Command::Report { render } => {
            config.validate()?;
            cmd_report(&config, render, false)
        }
        Command::All { render } => {
            config.validate()?;
            cmd_report(&config, render, true)
        }
    }
}

fn prepare_out_dir(config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&config.out_dir)?;
    config.save(&config.out_dir.join("effective_config.json"))
}

fn load_studies(config: &ExperimentConfig) -> Result<(Vec<LabelledStudy>, JoinSummary)> {
    match &config.corpus {
        CorpusSource::Synthetic(spec) => Ok((corpus::generate(spec)?, JoinSummary::default())),
        CorpusSource::Files { reports, labels } => corpus::load_corpus(reports, labels),
    }
}

fn cmd_gen(config: &ExperimentConfig) -> Result<()> {
    prepare_out_dir(config)?;
    let (studies, _) = load_studies(config)?;

    let reports_path = config.out_dir.join("reports.jsonl");
    corpus::write_reports_jsonl(BufWriter::new(File::create(&reports_path)?), &studies)?;
    let labels_path = config.out_dir.join("labels.csv");
    corpus::write_labels_csv(BufWriter::new(File::create(&labels_path)?), &studies)?;

    println!(
        "wrote {} studies to {} and {}",
        studies.len(),
        reports_path.display(),
        labels_path.display()
    );
    Ok(())
}

// --- feature cache --------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FeatureRow {
    study_id: String,
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

fn write_features_jsonl(path: &Path, ids: &[String], rows: &[Vec<f64>], dim: usize) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for (id, row) in ids.iter().zip(rows) {
        let (indices, values): (Vec<usize>, Vec<f64>) = row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .unzip();
        let line = serde_json::to_string(&FeatureRow {
            study_id: id.clone(),
            dim,
            indices,
            values,
        })?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

fn read_features_jsonl(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let row: FeatureRow = serde_json::from_str(&line)
            .map_err(|e| Error::parse(idx + 1, format!("bad feature row: {e}")))?;
        let mut dense = vec![0.0; row.dim];
        if row.indices.len() != row.values.len() {
            return Err(Error::parse(idx + 1, "index/value length mismatch"));
        }
        for (&i, &v) in row.indices.iter().zip(&row.values) {
            if i >= row.dim {
                return Err(Error::parse(idx + 1, format!("index {i} out of range")));
            }
            dense[i] = v;
        }
        out.push((row.study_id, dense));
    }
    Ok(out)
}

/// Feature rows for all studies, in corpus order: read from the prep cache
/// when present and consistent, otherwise computed in-process.
fn corpus_features(
    config: &ExperimentConfig,
    studies: &[LabelledStudy],
) -> Result<Vec<Vec<f64>>> {
    let cache = config.out_dir.join("features.jsonl");
    if cache.exists() {
        let cached = read_features_jsonl(&cache)?;
        let consistent = cached.len() == studies.len()
            && cached
                .iter()
                .zip(studies)
                .all(|((id, row), s)| *id == s.study_id && row.len() == config.featurizer.dim);
        if !consistent {
            return Err(Error::validation(format!(
                "feature cache {} does not match the corpus/config; re-run `prep` or remove it",
                cache.display()
            )));
        }
        return Ok(cached.into_iter().map(|(_, row)| row).collect());
    }
    studies
        .iter()
        .map(|s| {
            let tokens = preprocess(&s.text, &config.prep);
            config
                .featurizer
                .features(&tokens)
                .map(|fv| fv.values().to_vec())
        })
        .collect()
}

fn cmd_prep(config: &ExperimentConfig) -> Result<()> {
    prepare_out_dir(config)?;
    let (studies, _) = load_studies(config)?;

    let rows: Vec<Vec<f64>> = studies
        .iter()
        .map(|s| {
            let tokens = preprocess(&s.text, &config.prep);
            config
                .featurizer
                .features(&tokens)
                .map(|fv| fv.values().to_vec())
        })
        .collect::<Result<_>>()?;
    let ids: Vec<String> = studies.iter().map(|s| s.study_id.clone()).collect();
    let cache = config.out_dir.join("features.jsonl");
    write_features_jsonl(&cache, &ids, &rows, config.featurizer.dim)?;

    let indicators = compute_indicators(&studies, &config.strategy)?;
    let indicators_path = config.out_dir.join("indicators.csv");
    write_indicators_csv(BufWriter::new(File::create(&indicators_path)?), &indicators)?;

    println!(
        "cached {} feature rows to {} and indicators to {}",
        rows.len(),
        cache.display(),
        indicators_path.display()
    );
    Ok(())
}

/// Corpus-order dataset plus per-split index lists.
struct PreparedData {
    dataset: BinaryDataset,
    train_idx: Vec<usize>,
    val_idx: Vec<usize>,
    test_idx: Vec<usize>,
}

fn prepare_dataset(config: &ExperimentConfig, studies: &[LabelledStudy]) -> Result<PreparedData> {
    let chex_tri: Vec<_> = studies.iter().map(|s| s.chexpert).collect();
    let chex_bin = binarise(&chex_tri, &config.strategy, CHEXPERT_STREAM)?;
    let rows = corpus_features(config, studies)?;

    let mut dataset = BinaryDataset::new(config.featurizer.dim);
    for ((study, row), &label) in studies.iter().zip(&rows).zip(&chex_bin) {
        dataset.push(study.study_id.clone(), row, label);
    }

    let idx = |split: Split| {
        studies
            .iter()
            .enumerate()
            .filter(|(_, s)| s.split == split)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    };
    Ok(PreparedData {
        dataset,
        train_idx: idx(Split::Train),
        val_idx: idx(Split::Validation),
        test_idx: idx(Split::Test),
    })
}

fn regime_indices(config: &ExperimentConfig, data: &PreparedData) -> Vec<usize> {
    match config.analysis.regime {
        UncertaintyRegime::TrainOnly => data.train_idx.clone(),
        UncertaintyRegime::TrainPlusValidation => data
            .train_idx
            .iter()
            .chain(&data.val_idx)
            .copied()
            .collect(),
    }
}

fn cmd_train(config: &ExperimentConfig, ensemble: Option<usize>) -> Result<()> {
    prepare_out_dir(config)?;
    let (studies, _) = load_studies(config)?;
    let prepared = prepare_dataset(config, &studies)?;
    let regime = regime_indices(config, &prepared);
    if regime.is_empty() {
        return Err(Error::validation("no training studies in the corpus"));
    }
    let data = prepared.dataset.subset(&regime);

    match ensemble {
        None => {
            let (params, trace) = train(&data, &config.arch, &config.train)?;
            let path = config.out_dir.join("model.json");
            save_checkpoint(&path, &params, &config.train)?;
            for w in &trace.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "trained on {} studies; epoch losses {:?}; checkpoint {}",
                data.len(),
                trace.epoch_losses,
                path.display()
            );
        }
        Some(members) => {
            if members < 2 {
                return Err(Error::validation("--ensemble needs at least 2 members"));
            }
            let dir = config.out_dir.join("ensemble");
            fs::create_dir_all(&dir)?;
            for i in 0..members {
                let member_config = crate::model::TrainConfig {
                    seed: config.uq.ensemble_base_seed.wrapping_add(i as u64),
                    ..config.train
                };
                let (params, _) = train(&data, &config.arch, &member_config)?;
                save_checkpoint(&dir.join(format!("member_{i:02}.json")), &params, &member_config)?;
            }
            println!("trained {members} ensemble members into {}", dir.display());
        }
    }
    Ok(())
}

fn load_ensemble(dir: &Path) -> Result<Vec<MlpParams>> {
    if !dir.is_dir() {
        return Err(Error::validation(format!(
            "ensemble directory {} not found; run `train --ensemble M` first",
            dir.display()
        )));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| load_checkpoint(p).map(|c| c.params))
        .collect()
}

fn cmd_sample(config: &ExperimentConfig, method: SampleMethod) -> Result<()> {
    prepare_out_dir(config)?;
    let (studies, _) = load_studies(config)?;
    let prepared = prepare_dataset(config, &studies)?;
    if prepared.test_idx.is_empty() {
        return Err(Error::validation("no test studies to sample"));
    }
    let test_data = prepared.dataset.subset(&prepared.test_idx);

    let matrix = match method {
        SampleMethod::Mc => {
            let checkpoint = load_checkpoint(&config.out_dir.join("model.json"))?;
            mc_dropout_predict(
                &checkpoint.params,
                &test_data,
                config.uq.mc_passes,
                config.uq.mc_seed,
            )?
        }
        SampleMethod::Ensemble => {
            let members = load_ensemble(&config.out_dir.join("ensemble"))?;
            crate::uq::ensemble_predict(&members, &test_data)?
        }
    };

    let path = config.out_dir.join("predictions.csv");
    write_predictions_csv(BufWriter::new(File::create(&path)?), &matrix)?;
    println!(
        "wrote {} x {} prediction matrix to {}",
        matrix.len(),
        matrix.samples_per_study(),
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    single_run: Option<crate::stats::ClassificationMetrics>,
    cross_validation: Option<crate::model::CrossValidation>,
}

fn cmd_eval(config: &ExperimentConfig, kfold: Option<usize>) -> Result<()> {
    prepare_out_dir(config)?;
    let (studies, _) = load_studies(config)?;
    let prepared = prepare_dataset(config, &studies)?;
    if prepared.train_idx.is_empty() {
        return Err(Error::validation("no training studies in the corpus"));
    }
    let train_data = prepared.dataset.subset(&prepared.train_idx);
    let threshold = config.train.decision_threshold;

    let single_run = if prepared.val_idx.is_empty() {
        None
    } else {
        let (params, _) = train(&train_data, &config.arch, &config.train)?;
        Some(crate::model::evaluate(
            &params,
            &prepared.dataset.subset(&prepared.val_idx),
            threshold,
        )?)
    };

    let cross_validation = match kfold {
        Some(k) => Some(cross_validate(&train_data, &config.arch, &config.train, k)?),
        None => None,
    };

    let output = EvalOutput {
        single_run,
        cross_validation,
    };
    let path = config.out_dir.join("metrics.json");
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');
    fs::write(&path, &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct CorrelateOutput {
    source: SampleSource,
    samples_per_study: usize,
    pe: analysis::CorrelationCells,
    psd: analysis::CorrelationCells,
}

fn cmd_correlate(
    config: &ExperimentConfig,
    predictions: Option<PathBuf>,
    indicators: Option<PathBuf>,
    t: &str,
) -> Result<()> {
    prepare_out_dir(config)?;
    let predictions_path = predictions.unwrap_or_else(|| config.out_dir.join("predictions.csv"));
    let indicators_path = indicators.unwrap_or_else(|| config.out_dir.join("indicators.csv"));

    let expected_t = match t {
        "all" => None,
        value => Some(value.parse::<usize>().map_err(|_| {
            Error::validation(format!("--t must be a positive integer or \"all\", got {value:?}"))
        })?),
    };

    let matrix = read_predictions_csv(BufReader::new(File::open(&predictions_path)?), expected_t)?;
    let all_indicators = read_indicators_csv(BufReader::new(File::open(&indicators_path)?))?;

    let by_id: std::collections::HashMap<&str, &crate::labels::UncertaintyIndicator> =
        all_indicators
            .iter()
            .map(|i| (i.study_id.as_str(), i))
            .collect();
    let aligned: Vec<crate::labels::UncertaintyIndicator> = matrix
        .study_ids()
        .iter()
        .map(|id| {
            by_id.get(id.as_str()).map(|&i| i.clone()).ok_or_else(|| {
                Error::validation(format!(
                    "study_id key mismatch: {id:?} has predictions but no indicators"
                ))
            })
        })
        .collect::<Result<_>>()?;

    let summaries = summarize(&matrix, config.train.decision_threshold);
    let (pe_table, psd_table) =
        analysis::correlate_uncertainty(&summaries, &summaries, &aligned)?;

    let output = CorrelateOutput {
        source: matrix.source,
        samples_per_study: matrix.samples_per_study(),
        pe: pe_table.mc_dropout,
        psd: psd_table.mc_dropout,
    };
    let path = config.out_dir.join("correlations.json");
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');
    fs::write(&path, &text)?;
    print!("{text}");
    Ok(())
}

fn write_matrix_and_summaries(
    out_dir: &Path,
    stem: &str,
    matrix: &SampleMatrix,
    threshold: f64,
) -> Result<()> {
    let predictions = out_dir.join(format!("predictions_{stem}.csv"));
    write_predictions_csv(BufWriter::new(File::create(predictions)?), matrix)?;
    let summaries = summarize(matrix, threshold);
    let path = out_dir.join(format!("summaries_{stem}.csv"));
    write_summaries_csv(BufWriter::new(File::create(path)?), &summaries)?;
    Ok(())
}

fn cmd_report(config: &ExperimentConfig, render: bool, full_artifacts: bool) -> Result<()> {
    prepare_out_dir(config)?;
    let artifacts = run_experiment(config)?;

    if full_artifacts {
        if matches!(config.corpus, CorpusSource::Synthetic(_)) {
            corpus::write_reports_jsonl(
                BufWriter::new(File::create(config.out_dir.join("reports.jsonl"))?),
                &artifacts.studies,
            )?;
            corpus::write_labels_csv(
                BufWriter::new(File::create(config.out_dir.join("labels.csv"))?),
                &artifacts.studies,
            )?;
        }
        write_indicators_csv(
            BufWriter::new(File::create(config.out_dir.join("indicators.csv"))?),
            &artifacts.indicators,
        )?;
        if let Some(model) = &artifacts.uq_model {
            save_checkpoint(&config.out_dir.join("model.json"), model, &config.train)?;
        }
        let threshold = config.train.decision_threshold;
        if let Some(matrix) = &artifacts.mc_matrix {
            write_matrix_and_summaries(&config.out_dir, "mc", matrix, threshold)?;
        }
        if let Some(matrix) = &artifacts.ensemble_matrix {
            write_matrix_and_summaries(&config.out_dir, "ensemble", matrix, threshold)?;
        }
    }

    let report_path = config.out_dir.join("report.json");
    emit_report(&artifacts.report, &report_path)?;
    if render {
        print!("{}", render_report(&artifacts.report));
    } else {
        println!("wrote {}", report_path.display());
    }
    Ok(())
}
