//! Experiment orchestration: runs the whole pipeline over one configuration
//! and assembles a machine-diffable JSON report (correlation tables, group
//! means, in/out-of-distribution metrics, mined error cases).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{CorpusSource, ExperimentConfig, UncertaintyRegime};
use crate::corpus::{self, JoinSummary, LabelledStudy, Split, TriLabel};
use crate::error::{Error, Result};
use crate::labels::{
    binarise, compute_indicators, BinaryLabel, UncertaintyIndicator, CHEXPERT_STREAM,
    NEGBIO_STREAM,
};
use crate::model::{
    cross_validate, evaluate, predict, train, BinaryDataset, CrossValidation, MlpParams,
};
use crate::stats::{classification_metrics, point_biserial, ClassificationMetrics, CorrelationResult};
use crate::uq::{
    check_aligned, ensemble_predict, ensemble_train, group_means, mc_dropout_predict, summarize,
    GroupMeans, IndicatorField, SampleMatrix, UncertaintySummary,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The JSON schema the emitted report conforms to, shipped with the crate.
pub const REPORT_SCHEMA_JSON: &str = include_str!("../data/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Pe,
    Psd,
}

/// One row of a correlation table: the three indicator columns for one
/// uncertainty source. Degenerate cells (constant indicator or constant
/// measure) are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCells {
    pub tld: Option<CorrelationResult>,
    pub chex_uncertain: Option<CorrelationResult>,
    pub neg_uncertain: Option<CorrelationResult>,
}

/// 2×3 table of point-biserial correlations for one uncertainty measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub measure: Measure,
    pub mc_dropout: CorrelationCells,
    pub deep_ensembles: CorrelationCells,
}

fn correlation_cell(values: &[f64], flags: &[bool]) -> Result<Option<CorrelationResult>> {
    match point_biserial(values, flags) {
        Ok(result) => Ok(Some(result)),
        Err(Error::UndefinedCorrelation(_)) => Ok(None),
        Err(other) => Err(other),
    }
}

fn correlation_cells(
    summaries: &[UncertaintySummary],
    indicators: &[UncertaintyIndicator],
    measure: Measure,
) -> Result<CorrelationCells> {
    let values: Vec<f64> = summaries
        .iter()
        .map(|s| match measure {
            Measure::Pe => s.pe,
            Measure::Psd => s.psd,
        })
        .collect();
    let flags = |field: IndicatorField| -> Vec<bool> {
        indicators
            .iter()
            .map(|i| crate::uq::indicator_value(i, field))
            .collect()
    };
    Ok(CorrelationCells {
        tld: correlation_cell(&values, &flags(IndicatorField::Tld))?,
        chex_uncertain: correlation_cell(&values, &flags(IndicatorField::ChexUncertain))?,
        neg_uncertain: correlation_cell(&values, &flags(IndicatorField::NegUncertain))?,
    })
}

/// Correlate PE and PSD against all three indicators for both uncertainty
/// sources. Returns the (PE, PSD) table pair.
pub fn correlate_uncertainty(
    mc_summaries: &[UncertaintySummary],
    ensemble_summaries: &[UncertaintySummary],
    indicators: &[UncertaintyIndicator],
) -> Result<(CorrelationTable, CorrelationTable)> {
    check_aligned(mc_summaries, indicators)?;
    check_aligned(ensemble_summaries, indicators)?;
    let pe_table = CorrelationTable {
        measure: Measure::Pe,
        mc_dropout: correlation_cells(mc_summaries, indicators, Measure::Pe)?,
        deep_ensembles: correlation_cells(ensemble_summaries, indicators, Measure::Pe)?,
    };
    let psd_table = CorrelationTable {
        measure: Measure::Psd,
        mc_dropout: correlation_cells(mc_summaries, indicators, Measure::Psd)?,
        deep_ensembles: correlation_cells(ensemble_summaries, indicators, Measure::Psd)?,
    };
    Ok((pe_table, psd_table))
}

/// `in-distribution − out-of-distribution` metric gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodEval {
    pub id: ClassificationMetrics,
    pub ood: ClassificationMetrics,
    pub deltas: MetricDeltas,
}

/// Score one prediction set against the training labeller's targets (ID)
/// and the other labeller's targets (OOD), side by side.
pub fn ood_eval(
    predictions: &[BinaryLabel],
    id_labels: &[BinaryLabel],
    ood_labels: &[BinaryLabel],
) -> Result<OodEval> {
    let id = classification_metrics(predictions, id_labels)?;
    let ood = classification_metrics(predictions, ood_labels)?;
    let delta = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let deltas = MetricDeltas {
        accuracy: id.accuracy - ood.accuracy,
        precision: delta(id.precision, ood.precision),
        recall: delta(id.recall, ood.recall),
        f1: delta(id.f1, ood.f1),
    };
    Ok(OodEval { id, ood, deltas })
}

/// A study the model was confident about while the labellers disagreed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCase {
    pub study_id: String,
    pub mean_prob: f64,
    pub tld: bool,
    /// First 300 characters of the ingested report text.
    pub excerpt: String,
}

/// Studies with `tld = 1` and `|p̂ − 0.5| > tau`, most confident first
/// (study id breaks ties). Output does not depend on input order.
pub fn mine_errors(
    summaries: &[UncertaintySummary],
    indicators: &[UncertaintyIndicator],
    studies: &[LabelledStudy],
    tau: f64,
) -> Result<Vec<ErrorCase>> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::validation("tau must lie in (0, 0.5)"));
    }
    check_aligned(summaries, indicators)?;
    let texts: HashMap<&str, &str> = studies
        .iter()
        .map(|s| (s.study_id.as_str(), s.text.as_str()))
        .collect();

    let mut cases = Vec::new();
    for (summary, indicator) in summaries.iter().zip(indicators) {
        if !indicator.tld || (summary.mean_prob - 0.5).abs() <= tau {
            continue;
        }
        let text = texts.get(summary.study_id.as_str()).ok_or_else(|| {
            Error::validation(format!("no report text for study {:?}", summary.study_id))
        })?;
        cases.push(ErrorCase {
            study_id: summary.study_id.clone(),
            mean_prob: summary.mean_prob,
            tld: true,
            excerpt: text.chars().take(300).collect(),
        });
    }
    cases.sort_by(|a, b| {
        let conf_a = (a.mean_prob - 0.5).abs();
        let conf_b = (b.mean_prob - 0.5).abs();
        conf_b
            .partial_cmp(&conf_a)
            .unwrap()
            .then_with(|| a.study_id.cmp(&b.study_id))
    });
    Ok(cases)
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TriCounts {
    pub positive: usize,
    pub negative: usize,
    pub uncertain: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub train: TriCounts,
    pub validation: TriCounts,
    pub test: TriCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TldRates {
    /// Fraction of studies whose raw three-class verdicts disagree.
    pub raw: Option<f64>,
    /// Fraction with TLD after binarisation under the configured strategy.
    pub post_binarisation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusSection {
    pub split_counts: SplitCounts,
    pub exclusions: JoinSummary,
    pub chexpert_distribution: LabelDistribution,
    pub negbio_distribution: LabelDistribution,
    pub tld_rates: TldRates,
}

/// Classifier performance per method. `single_run` is train→validation;
/// `cross_validation` folds the train split; the two sampling methods are
/// scored on the test split via their thresholded mean probabilities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelSection {
    pub single_run: Option<ClassificationMetrics>,
    pub cross_validation: Option<CrossValidation>,
    pub mc_dropout: Option<ClassificationMetrics>,
    pub deep_ensembles: Option<ClassificationMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodGroupMeans {
    pub mc_dropout: GroupMeans,
    pub deep_ensembles: GroupMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySection {
    /// Mean PE/PSD split by TLD, per method.
    pub group_means: MethodGroupMeans,
    pub pe_correlations: CorrelationTable,
    pub psd_correlations: CorrelationTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSection {
    pub tau: f64,
    pub mc_dropout: Vec<ErrorCase>,
    pub deep_ensembles: Vec<ErrorCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub corpus: CorpusSection,
    pub model: ModelSection,
    pub uncertainty: Option<UncertaintySection>,
    pub ood: Option<OodEval>,
    pub errors: ErrorSection,
}

impl Report {
    pub fn empty(config: ExperimentConfig) -> Self {
        let tau = config.analysis.tau;
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            corpus: CorpusSection::default(),
            model: ModelSection::default(),
            uncertainty: None,
            ood: None,
            errors: ErrorSection {
                tau,
                mc_dropout: Vec::new(),
                deep_ensembles: Vec::new(),
            },
        }
    }
}

/// Serialize the report as pretty JSON (stable field order, shortest
/// round-trip numbers) so identical experiments emit identical bytes.
pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

/// Everything a run produces, including intermediates the CLI exports.
#[derive(Debug)]
pub struct ExperimentArtifacts {
    pub report: Report,
    pub studies: Vec<LabelledStudy>,
    /// Indicators for the whole joined corpus, in corpus order.
    pub indicators: Vec<UncertaintyIndicator>,
    /// The model behind the uncertainty analysis (regime-trained).
    pub uq_model: Option<MlpParams>,
    pub mc_matrix: Option<SampleMatrix>,
    pub ensemble_matrix: Option<SampleMatrix>,
    pub mc_summaries: Vec<UncertaintySummary>,
    pub ensemble_summaries: Vec<UncertaintySummary>,
}

fn tri_counts(studies: &[LabelledStudy], split: Split, label: impl Fn(&LabelledStudy) -> TriLabel) -> TriCounts {
    let mut counts = TriCounts::default();
    for study in studies.iter().filter(|s| s.split == split) {
        match label(study) {
            TriLabel::Positive => counts.positive += 1,
            TriLabel::Negative => counts.negative += 1,
            TriLabel::Uncertain => counts.uncertain += 1,
            TriLabel::Missing => {}
        }
    }
    counts
}

fn distribution(
    studies: &[LabelledStudy],
    label: impl Fn(&LabelledStudy) -> TriLabel + Copy,
) -> LabelDistribution {
    LabelDistribution {
        train: tri_counts(studies, Split::Train, label),
        validation: tri_counts(studies, Split::Validation, label),
        test: tri_counts(studies, Split::Test, label),
    }
}

/// Run the full pipeline for one configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentArtifacts> {
    config.validate()?;

    // 1. Corpus.
    let (studies, exclusions) = match &config.corpus {
        CorpusSource::Synthetic(spec) => (corpus::generate(spec)?, JoinSummary::default()),
        CorpusSource::Files { reports, labels } => corpus::load_corpus(reports, labels)?,
    };

    // 2. Indicators and per-labeller binarisation over the full corpus, so
    //    U-Random draws are addressed by corpus position everywhere.
    let indicators = compute_indicators(&studies, &config.strategy)?;
    let chex_tri: Vec<TriLabel> = studies.iter().map(|s| s.chexpert).collect();
    let neg_tri: Vec<TriLabel> = studies.iter().map(|s| s.negbio).collect();
    let chex_bin = binarise(&chex_tri, &config.strategy, CHEXPERT_STREAM)?;
    let neg_bin = binarise(&neg_tri, &config.strategy, NEGBIO_STREAM)?;

    let split_idx = |split: Split| -> Vec<usize> {
        studies
            .iter()
            .enumerate()
            .filter(|(_, s)| s.split == split)
            .map(|(i, _)| i)
            .collect()
    };
    let train_idx = split_idx(Split::Train);
    let val_idx = split_idx(Split::Validation);
    let test_idx = split_idx(Split::Test);

    let raw_disagreement = studies
        .iter()
        .filter(|s| s.chexpert != s.negbio)
        .count();
    let post_tld = indicators.iter().filter(|i| i.tld).count();
    let corpus_section = CorpusSection {
        split_counts: SplitCounts {
            train: train_idx.len(),
            validation: val_idx.len(),
            test: test_idx.len(),
            total: studies.len(),
        },
        exclusions,
        chexpert_distribution: distribution(&studies, |s| s.chexpert),
        negbio_distribution: distribution(&studies, |s| s.negbio),
        tld_rates: TldRates {
            raw: (!studies.is_empty())
                .then(|| raw_disagreement as f64 / studies.len() as f64),
            post_binarisation: (!studies.is_empty())
                .then(|| post_tld as f64 / studies.len() as f64),
        },
    };

    let mut report = Report::empty(config.clone());
    report.corpus = corpus_section;

    if studies.is_empty() || train_idx.is_empty() {
        return Ok(ExperimentArtifacts {
            report,
            studies,
            indicators,
            uq_model: None,
            mc_matrix: None,
            ensemble_matrix: None,
            mc_summaries: Vec::new(),
            ensemble_summaries: Vec::new(),
        });
    }

    // 3. Features for the whole corpus, once; splits are index subsets.
    let dataset = BinaryDataset::from_studies(&studies, &config.prep, &config.featurizer, &chex_bin)?;
    let train_data = dataset.subset(&train_idx);
    let threshold = config.train.decision_threshold;

    // 4. Single run: train split → validation split.
    if !val_idx.is_empty() {
        let (params, _) = train(&train_data, &config.arch, &config.train)?;
        report.model.single_run = Some(evaluate(&params, &dataset.subset(&val_idx), threshold)?);
    }

    // 5. K-fold cross-validation over the train split.
    if train_idx.len() >= config.analysis.kfold {
        report.model.cross_validation = Some(cross_validate(
            &train_data,
            &config.arch,
            &config.train,
            config.analysis.kfold,
        )?);
    }

    // 6. Uncertainty analysis on the test split, with models trained on the
    //    regime-configured data.
    let mut uq_model = None;
    let mut mc_matrix = None;
    let mut ensemble_matrix = None;
    let mut mc_summaries = Vec::new();
    let mut ensemble_summaries = Vec::new();

    if !test_idx.is_empty() {
        let regime_idx: Vec<usize> = match config.analysis.regime {
            UncertaintyRegime::TrainOnly => train_idx.clone(),
            UncertaintyRegime::TrainPlusValidation => {
                train_idx.iter().chain(&val_idx).copied().collect()
            }
        };
        let regime_data = dataset.subset(&regime_idx);
        let test_data = dataset.subset(&test_idx);
        let test_indicators: Vec<UncertaintyIndicator> =
            test_idx.iter().map(|&i| indicators[i].clone()).collect();
        let test_chex: Vec<BinaryLabel> = test_idx.iter().map(|&i| chex_bin[i]).collect();
        let test_neg: Vec<BinaryLabel> = test_idx.iter().map(|&i| neg_bin[i]).collect();
        let test_studies: Vec<LabelledStudy> =
            test_idx.iter().map(|&i| studies[i].clone()).collect();

        let (base_model, _) = train(&regime_data, &config.arch, &config.train)?;
        let mc = mc_dropout_predict(&base_model, &test_data, config.uq.mc_passes, config.uq.mc_seed)?;
        let members = ensemble_train(
            &regime_data,
            &config.arch,
            &config.train,
            config.uq.ensemble_members,
            config.uq.ensemble_base_seed,
        )?;
        let de = ensemble_predict(&members, &test_data)?;

        let mc_sum = summarize(&mc, threshold);
        let de_sum = summarize(&de, threshold);

        // Method metrics: thresholded mean probability vs the training
        // labeller's binarised test labels.
        let mc_pred: Vec<BinaryLabel> = mc_sum.iter().map(|s| s.predicted_label).collect();
        let de_pred: Vec<BinaryLabel> = de_sum.iter().map(|s| s.predicted_label).collect();
        report.model.mc_dropout = Some(classification_metrics(&mc_pred, &test_chex)?);
        report.model.deep_ensembles = Some(classification_metrics(&de_pred, &test_chex)?);

        let (pe_table, psd_table) = correlate_uncertainty(&mc_sum, &de_sum, &test_indicators)?;
        report.uncertainty = Some(UncertaintySection {
            group_means: MethodGroupMeans {
                mc_dropout: group_means(&mc_sum, &test_indicators, IndicatorField::Tld)?,
                deep_ensembles: group_means(&de_sum, &test_indicators, IndicatorField::Tld)?,
            },
            pe_correlations: pe_table,
            psd_correlations: psd_table,
        });

        // OOD: deterministic predictions of the regime model against each
        // labeller's binarised test labels.
        let det_pred: Vec<BinaryLabel> = (0..test_data.len())
            .map(|i| predict(&base_model, test_data.row(i), threshold).map(|(_, l)| l))
            .collect::<Result<_>>()?;
        report.ood = Some(ood_eval(&det_pred, &test_chex, &test_neg)?);

        report.errors.mc_dropout =
            mine_errors(&mc_sum, &test_indicators, &test_studies, config.analysis.tau)?;
        report.errors.deep_ensembles =
            mine_errors(&de_sum, &test_indicators, &test_studies, config.analysis.tau)?;

        uq_model = Some(base_model);
        mc_matrix = Some(mc);
        ensemble_matrix = Some(de);
        mc_summaries = mc_sum;
        ensemble_summaries = de_sum;
    }

    Ok(ExperimentArtifacts {
        report,
        studies,
        indicators,
        uq_model,
        mc_matrix,
        ensemble_matrix,
        mc_summaries,
        ensemble_summaries,
    })
}

// ---------------------------------------------------------------------------
// Human-readable rendering
// ---------------------------------------------------------------------------

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn fmt_cell(cell: &Option<CorrelationResult>) -> String {
    match cell {
        Some(c) => format!("{:+.4} (p={:.3})", c.r_pb, c.p_value),
        None => "-".into(),
    }
}

/// Aligned text tables for terminal consumption.
pub fn render_report(report: &Report) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();

    let sc = &report.corpus.split_counts;
    writeln!(out, "corpus (strategy: {})", report.config.strategy.name()).unwrap();
    writeln!(
        out,
        "  studies: {} (train {}, validation {}, test {})",
        sc.total, sc.train, sc.validation, sc.test
    )
    .unwrap();
    if let (Some(raw), Some(post)) = (
        report.corpus.tld_rates.raw,
        report.corpus.tld_rates.post_binarisation,
    ) {
        writeln!(
            out,
            "  disagreement: raw {:.1}%, post-binarisation {:.1}%",
            100.0 * raw,
            100.0 * post
        )
        .unwrap();
    }

    writeln!(out, "\nmodel performance").unwrap();
    writeln!(
        out,
        "  {:<18} {:>9} {:>10} {:>8} {:>8}",
        "method", "accuracy", "precision", "recall", "f1"
    )
    .unwrap();
    let mut metric_row = |name: &str, m: &ClassificationMetrics| {
        writeln!(
            out,
            "  {:<18} {:>9.4} {:>10} {:>8} {:>8}",
            name,
            m.accuracy,
            fmt_opt(m.precision),
            fmt_opt(m.recall),
            fmt_opt(m.f1)
        )
        .unwrap();
    };
    if let Some(m) = &report.model.single_run {
        metric_row("single_run", m);
    }
    if let Some(m) = &report.model.mc_dropout {
        metric_row("mc_dropout", m);
    }
    if let Some(m) = &report.model.deep_ensembles {
        metric_row("deep_ensembles", m);
    }
    if let Some(cv) = &report.model.cross_validation {
        writeln!(
            out,
            "  {:<18} {:>9.4} {:>10} {:>8} {:>8}  (k={})",
            "cross_validation",
            cv.mean.accuracy,
            fmt_opt(cv.mean.precision),
            fmt_opt(cv.mean.recall),
            fmt_opt(cv.mean.f1),
            cv.k
        )
        .unwrap();
    }

    if let Some(unc) = &report.uncertainty {
        writeln!(out, "\ngroup means over test split (by TLD)").unwrap();
        writeln!(
            out,
            "  {:<18} {:<10} {:>9} {:>9} {:>6}",
            "method", "group", "mean_pe", "mean_psd", "n"
        )
        .unwrap();
        let mut group_rows = |name: &str, g: &GroupMeans| {
            for (label, mean) in [
                ("tld", g.flagged),
                ("tla", g.unflagged),
                ("overall", g.overall),
            ] {
                if let Some(m) = mean {
                    writeln!(
                        out,
                        "  {:<18} {:<10} {:>9.4} {:>9.4} {:>6}",
                        name, label, m.mean_pe, m.mean_psd, m.count
                    )
                    .unwrap();
                }
            }
        };
        group_rows("mc_dropout", &unc.group_means.mc_dropout);
        group_rows("deep_ensembles", &unc.group_means.deep_ensembles);

        for table in [&unc.pe_correlations, &unc.psd_correlations] {
            let measure = match table.measure {
                Measure::Pe => "PE",
                Measure::Psd => "PSD",
            };
            writeln!(out, "\npoint-biserial correlations ({measure})").unwrap();
            writeln!(
                out,
                "  {:<18} {:>18} {:>18} {:>18}",
                "method", "tld", "chex_uncertain", "neg_uncertain"
            )
            .unwrap();
            for (name, cells) in [
                ("mc_dropout", &table.mc_dropout),
                ("deep_ensembles", &table.deep_ensembles),
            ] {
                writeln!(
                    out,
                    "  {:<18} {:>18} {:>18} {:>18}",
                    name,
                    fmt_cell(&cells.tld),
                    fmt_cell(&cells.chex_uncertain),
                    fmt_cell(&cells.neg_uncertain)
                )
                .unwrap();
            }
        }
    }

    if let Some(ood) = &report.ood {
        writeln!(out, "\ntest performance (ID vs OOD labels)").unwrap();
        writeln!(
            out,
            "  {:<8} {:>9} {:>10} {:>8} {:>8}",
            "labels", "accuracy", "precision", "recall", "f1"
        )
        .unwrap();
        for (name, m) in [("id", &ood.id), ("ood", &ood.ood)] {
            writeln!(
                out,
                "  {:<8} {:>9.4} {:>10} {:>8} {:>8}",
                name,
                m.accuracy,
                fmt_opt(m.precision),
                fmt_opt(m.recall),
                fmt_opt(m.f1)
            )
            .unwrap();
        }
    }

    let mined = report.errors.mc_dropout.len() + report.errors.deep_ensembles.len();
    writeln!(
        out,
        "\nconfident-but-disputed studies (tau = {}): {} mined",
        report.errors.tau, mined
    )
    .unwrap();
    for case in report.errors.mc_dropout.iter().take(5) {
        // The first excerpt line is the report header; show the body line.
        let body = case.excerpt.lines().nth(1).unwrap_or(&case.excerpt);
        writeln!(out, "  [mc] {} p={:.3}  {}", case.study_id, case.mean_prob, body).unwrap();
    }

    out
}
