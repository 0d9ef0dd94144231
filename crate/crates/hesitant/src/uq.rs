//! MC dropout and deep-ensemble sampling, plus aggregation into mean
//! probability, predictive standard deviation (PSD), and predictive
//! entropy (PE).
//!
//! Both sampling methods produce a [`SampleMatrix`] of per-study prediction
//! samples: T stochastic dropout passes from one model, or one deterministic
//! prediction from each of M ensemble members. Summaries reduce each row to
//! `p̂` (mean), PSD (sample standard deviation, n−1), and PE (natural-log
//! entropy of `p̂`).

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{BinaryLabel, UncertaintyIndicator};
use crate::model::{forward, train, BinaryDataset, ForwardMode, MlpParams, TrainConfig};
use crate::model::Arch;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    McDropout,
    DeepEnsemble,
    External,
}

/// N×T matrix of prediction samples, rows aligned with `study_ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    study_ids: Vec<String>,
    samples: Vec<f64>,
    t: usize,
    pub source: SampleSource,
}

impl SampleMatrix {
    pub fn new(study_ids: Vec<String>, rows: Vec<Vec<f64>>, source: SampleSource) -> Result<Self> {
        if study_ids.len() != rows.len() {
            return Err(Error::validation("study id / row count mismatch"));
        }
        let t = rows.first().map(Vec::len).unwrap_or(0);
        if t < 2 {
            return Err(Error::validation(
                "a sample matrix needs at least 2 samples per study (PSD is undefined otherwise)",
            ));
        }
        let mut samples = Vec::with_capacity(study_ids.len() * t);
        for row in &rows {
            if row.len() != t {
                return Err(Error::validation("ragged sample rows"));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::validation("sample probabilities must lie in [0, 1]"));
            }
            samples.extend_from_slice(row);
        }
        Ok(SampleMatrix {
            study_ids,
            samples,
            t,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.study_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.study_ids.is_empty()
    }

    pub fn samples_per_study(&self) -> usize {
        self.t
    }

    pub fn study_ids(&self) -> &[String] {
        &self.study_ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.t..(i + 1) * self.t]
    }
}

/// Per-study uncertainty aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySummary {
    pub study_id: String,
    pub mean_prob: f64,
    pub psd: f64,
    pub pe: f64,
    pub predicted_label: BinaryLabel,
}

/// T stochastic dropout passes per study. Pass `t` of study `i` draws its
/// mask from the stream addressed by `(seed, i, t)`, so the matrix is a pure
/// function of `(params, data, passes, seed)` regardless of evaluation order.
pub fn mc_dropout_predict(
    params: &MlpParams,
    data: &BinaryDataset,
    passes: usize,
    seed: u64,
) -> Result<SampleMatrix> {
    if passes < 2 {
        return Err(Error::validation(
            "MC dropout needs at least 2 passes (PSD is undefined otherwise)",
        ));
    }
    let rows: Vec<Vec<f64>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            (0..passes)
                .map(|pass| {
                    forward(
                        params,
                        data.row(i),
                        ForwardMode::StochasticDropout {
                            seed: rng::mix(seed, &[i as u64, pass as u64]),
                        },
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    SampleMatrix::new(data.study_ids.clone(), rows, SampleSource::McDropout)
}

/// Train `members` models, member `i` seeded with `base_seed + i`.
pub fn ensemble_train(
    data: &BinaryDataset,
    arch: &Arch,
    config: &TrainConfig,
    members: usize,
    base_seed: u64,
) -> Result<Vec<MlpParams>> {
    let seeds: Vec<u64> = (0..members as u64)
        .map(|i| base_seed.wrapping_add(i))
        .collect();
    ensemble_train_with_seeds(data, arch, config, &seeds)
}

/// Train one model per explicit seed (the degenerate identical-seed ensemble
/// is expressible by repeating a seed).
pub fn ensemble_train_with_seeds(
    data: &BinaryDataset,
    arch: &Arch,
    config: &TrainConfig,
    seeds: &[u64],
) -> Result<Vec<MlpParams>> {
    if seeds.len() < 2 {
        return Err(Error::validation("an ensemble needs at least 2 members"));
    }
    seeds
        .par_iter()
        .map(|&seed| {
            let member_config = TrainConfig { seed, ..*config };
            train(data, arch, &member_config).map(|(params, _)| params)
        })
        .collect()
}

/// One deterministic prediction per ensemble member (dropout off at
/// inference): column j holds member j's probabilities.
pub fn ensemble_predict(models: &[MlpParams], data: &BinaryDataset) -> Result<SampleMatrix> {
    if models.len() < 2 {
        return Err(Error::validation("an ensemble needs at least 2 members"));
    }
    let rows: Vec<Vec<f64>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            models
                .iter()
                .map(|m| forward(m, data.row(i), ForwardMode::Deterministic))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    SampleMatrix::new(data.study_ids.clone(), rows, SampleSource::DeepEnsemble)
}

/// Predictive entropy `H(p̂) = −p̂·ln(p̂) − (1−p̂)·ln(1−p̂)` in nats, with the
/// convention `0·ln 0 = 0`; ranges over `[0, ln 2]`.
pub fn pe(p_hat: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::validation(format!(
            "probability {p_hat} outside [0, 1]"
        )));
    }
    Ok(entropy_nats(p_hat))
}

fn entropy_nats(p: f64) -> f64 {
    let term = |q: f64| if q == 0.0 { 0.0 } else { -q * q.ln() };
    term(p) + term(1.0 - p)
}

/// Reduce each row to `(p̂, psd, pe, label)`.
///
/// PSD uses the n−1 denominator and is exactly zero iff all entries of the
/// row are equal.
pub fn summarize(matrix: &SampleMatrix, threshold: f64) -> Vec<UncertaintySummary> {
    (0..matrix.len())
        .map(|i| {
            let row = matrix.row(i);
            let mean = (row.iter().sum::<f64>() / row.len() as f64).clamp(0.0, 1.0);
            let psd = row_psd(row, mean);
            UncertaintySummary {
                study_id: matrix.study_ids[i].clone(),
                mean_prob: mean,
                psd,
                pe: entropy_nats(mean),
                predicted_label: if mean >= threshold {
                    BinaryLabel::Positive
                } else {
                    BinaryLabel::Negative
                },
            }
        })
        .collect()
}

fn row_psd(row: &[f64], mean: f64) -> f64 {
    if row.iter().all(|&v| v == row[0]) {
        return 0.0;
    }
    let ss: f64 = row.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (ss / (row.len() as f64 - 1.0)).sqrt()
}

/// Which indicator column splits the groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorField {
    Tld,
    ChexUncertain,
    NegUncertain,
}

pub fn indicator_value(indicator: &UncertaintyIndicator, field: IndicatorField) -> bool {
    match field {
        IndicatorField::Tld => indicator.tld,
        IndicatorField::ChexUncertain => indicator.chex_uncertain,
        IndicatorField::NegUncertain => indicator.neg_uncertain,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMean {
    pub mean_pe: f64,
    pub mean_psd: f64,
    pub count: usize,
}

/// Mean PE/PSD for the flagged group, the unflagged group, and overall;
/// empty groups are reported as absent rather than NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans {
    pub flagged: Option<GroupMean>,
    pub unflagged: Option<GroupMean>,
    pub overall: Option<GroupMean>,
}

pub fn group_means(
    summaries: &[UncertaintySummary],
    indicators: &[UncertaintyIndicator],
    field: IndicatorField,
) -> Result<GroupMeans> {
    check_aligned(summaries, indicators)?;

    let mean_over = |flag: Option<bool>| -> Option<GroupMean> {
        let selected: Vec<&UncertaintySummary> = summaries
            .iter()
            .zip(indicators)
            .filter(|(_, ind)| flag.is_none_or(|f| indicator_value(ind, field) == f))
            .map(|(s, _)| s)
            .collect();
        if selected.is_empty() {
            return None;
        }
        let n = selected.len() as f64;
        Some(GroupMean {
            mean_pe: selected.iter().map(|s| s.pe).sum::<f64>() / n,
            mean_psd: selected.iter().map(|s| s.psd).sum::<f64>() / n,
            count: selected.len(),
        })
    };

    Ok(GroupMeans {
        flagged: mean_over(Some(true)),
        unflagged: mean_over(Some(false)),
        overall: mean_over(None),
    })
}

pub(crate) fn check_aligned(
    summaries: &[UncertaintySummary],
    indicators: &[UncertaintyIndicator],
) -> Result<()> {
    if summaries.len() != indicators.len()
        || summaries
            .iter()
            .zip(indicators)
            .any(|(s, i)| s.study_id != i.study_id)
    {
        return Err(Error::validation(
            "summaries and indicators must be keyed identically",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV interchange
// ---------------------------------------------------------------------------

/// Write `study_id,s0,...,s{T−1}` rows at full precision.
pub fn write_predictions_csv<W: Write>(writer: W, matrix: &SampleMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["study_id".to_string()];
    header.extend((0..matrix.samples_per_study()).map(|j| format!("s{j}")));
    w.write_record(&header)?;
    for i in 0..matrix.len() {
        let mut record = vec![matrix.study_ids[i].clone()];
        record.extend(matrix.row(i).iter().map(|p| p.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read an external prediction matrix. `expected_t = Some(t)` requires
/// exactly `t` sample columns; `None` ("all") accepts any width ≥ 2.
pub fn read_predictions_csv<R: Read>(
    reader: R,
    expected_t: Option<usize>,
) -> Result<SampleMatrix> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.first() != Some(&"study_id") {
        return Err(Error::validation("prediction file must start with study_id"));
    }
    let t = cols.len() - 1;
    for (j, col) in cols[1..].iter().enumerate() {
        if *col != format!("s{j}") {
            return Err(Error::validation(format!(
                "prediction columns must be s0..s{}, got {col:?}",
                t.saturating_sub(1)
            )));
        }
    }
    if let Some(expected) = expected_t {
        if t != expected {
            return Err(Error::validation(format!(
                "expected {expected} sample columns, file has {t}"
            )));
        }
    }

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let lineno = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        ids.push(record[0].to_string());
        let row: Vec<f64> = record
            .iter()
            .skip(1)
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad probability {cell:?}")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    SampleMatrix::new(ids, rows, SampleSource::External)
}

const SUMMARY_HEADER: [&str; 5] = ["study_id", "mean_prob", "psd", "pe", "predicted_label"];

pub fn write_summaries_csv<W: Write>(writer: W, summaries: &[UncertaintySummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        w.write_record([
            s.study_id.as_str(),
            &s.mean_prob.to_string(),
            &s.psd.to_string(),
            &s.pe.to_string(),
            s.predicted_label.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summaries_csv<R: Read>(reader: R) -> Result<Vec<UncertaintySummary>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != SUMMARY_HEADER {
        return Err(Error::validation(format!(
            "summary file header must be exactly {:?}",
            SUMMARY_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let parse = |cell: &str| {
            cell.parse::<f64>()
                .map_err(|_| Error::validation(format!("bad number {cell:?}")))
        };
        out.push(UncertaintySummary {
            study_id: record[0].to_string(),
            mean_prob: parse(&record[1])?,
            psd: parse(&record[2])?,
            pe: parse(&record[3])?,
            predicted_label: BinaryLabel::parse(&record[4])?,
        });
    }
    Ok(out)
}
