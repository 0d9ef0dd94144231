//! Binarisation of uncertain labels and linguistic-uncertainty indicators.
//!
//! Three strategies map the three-class verdicts onto binary training
//! targets: `U-Ones` (uncertain → positive), `U-Zeros` (uncertain →
//! negative), and `U-Random` (an independent fair coin per label, addressed
//! by `(seed, stream, index)` so the draw for one study never depends on the
//! others). Indicators capture linguistic uncertainty per study: true-label
//! disagreement after binarisation (TLD) plus each labeller's raw uncertain
//! flag.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelledStudy, TriLabel};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Positive,
    Negative,
}

impl BinaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BinaryLabel::Positive => "positive",
            BinaryLabel::Negative => "negative",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(BinaryLabel::Positive),
            "negative" => Ok(BinaryLabel::Negative),
            other => Err(Error::validation(format!("unknown binary label {other:?}"))),
        }
    }
}

/// Mapping applied to `Uncertain` verdicts; certain verdicts pass through
/// under every strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    UOnes,
    UZeros,
    URandom { seed: u64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::UOnes => "u_ones",
            Strategy::UZeros => "u_zeros",
            Strategy::URandom { .. } => "u_random",
        }
    }
}

/// Stream id for the CheXpert label column under `U-Random`.
pub const CHEXPERT_STREAM: u64 = 0;
/// Stream id for the NegBio label column under `U-Random`.
pub const NEGBIO_STREAM: u64 = 1;

/// Binarise a label column. `stream_id` distinguishes labeller columns so
/// each receives independent `U-Random` draws.
pub fn binarise(
    labels: &[TriLabel],
    strategy: &Strategy,
    stream_id: u64,
) -> Result<Vec<BinaryLabel>> {
    labels
        .iter()
        .enumerate()
        .map(|(index, &label)| binarise_one(label, strategy, stream_id, index))
        .collect()
}

fn binarise_one(
    label: TriLabel,
    strategy: &Strategy,
    stream_id: u64,
    index: usize,
) -> Result<BinaryLabel> {
    match label {
        TriLabel::Positive => Ok(BinaryLabel::Positive),
        TriLabel::Negative => Ok(BinaryLabel::Negative),
        TriLabel::Uncertain => Ok(match strategy {
            Strategy::UOnes => BinaryLabel::Positive,
            Strategy::UZeros => BinaryLabel::Negative,
            Strategy::URandom { seed } => {
                if rng::coin(*seed, &[stream_id, index as u64]) {
                    BinaryLabel::Positive
                } else {
                    BinaryLabel::Negative
                }
            }
        }),
        TriLabel::Missing => Err(Error::validation(format!(
            "missing label at index {index}; exclude missing labels before binarising"
        ))),
    }
}

/// Per-study linguistic-uncertainty flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncertaintyIndicator {
    pub study_id: String,
    /// Binarised CheXpert and NegBio labels disagree.
    pub tld: bool,
    /// Raw CheXpert verdict is `Uncertain` (strategy-independent).
    pub chex_uncertain: bool,
    /// Raw NegBio verdict is `Uncertain` (strategy-independent).
    pub neg_uncertain: bool,
}

/// Compute indicators for each study: TLD from per-labeller binarisation
/// (streams [`CHEXPERT_STREAM`] and [`NEGBIO_STREAM`]), plus the raw
/// uncertain flags.
pub fn compute_indicators(
    studies: &[LabelledStudy],
    strategy: &Strategy,
) -> Result<Vec<UncertaintyIndicator>> {
    let chex_raw: Vec<TriLabel> = studies.iter().map(|s| s.chexpert).collect();
    let neg_raw: Vec<TriLabel> = studies.iter().map(|s| s.negbio).collect();
    let chex_bin = binarise(&chex_raw, strategy, CHEXPERT_STREAM)?;
    let neg_bin = binarise(&neg_raw, strategy, NEGBIO_STREAM)?;

    Ok(studies
        .iter()
        .enumerate()
        .map(|(i, study)| UncertaintyIndicator {
            study_id: study.study_id.clone(),
            tld: chex_bin[i] != neg_bin[i],
            chex_uncertain: chex_raw[i] == TriLabel::Uncertain,
            neg_uncertain: neg_raw[i] == TriLabel::Uncertain,
        })
        .collect())
}

const INDICATOR_HEADER: [&str; 4] = ["study_id", "tld", "chex_uncertain", "neg_uncertain"];

pub fn write_indicators_csv<W: Write>(writer: W, indicators: &[UncertaintyIndicator]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(INDICATOR_HEADER)?;
    for ind in indicators {
        w.write_record([
            ind.study_id.as_str(),
            if ind.tld { "1" } else { "0" },
            if ind.chex_uncertain { "1" } else { "0" },
            if ind.neg_uncertain { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_indicators_csv<R: Read>(reader: R) -> Result<Vec<UncertaintyIndicator>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != INDICATOR_HEADER {
        return Err(Error::validation(format!(
            "indicator file header must be exactly {:?}",
            INDICATOR_HEADER.join(",")
        )));
    }
    let parse_flag = |cell: &str| match cell {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::validation(format!("indicator cell must be 0 or 1, got {other:?}"))),
    };
    let mut out = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        out.push(UncertaintyIndicator {
            study_id: record[0].to_string(),
            tld: parse_flag(&record[1])?,
            chex_uncertain: parse_flag(&record[2])?,
            neg_uncertain: parse_flag(&record[3])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;

    use TriLabel::{Negative as N, Positive as P, Uncertain as U};

    fn study(id: &str, chexpert: TriLabel, negbio: TriLabel) -> LabelledStudy {
        LabelledStudy {
            study_id: id.into(),
            split: Split::Train,
            text: "text".into(),
            chexpert,
            negbio,
        }
    }

    #[test]
    fn certain_labels_pass_through_under_every_strategy() {
        for strategy in [Strategy::UOnes, Strategy::UZeros, Strategy::URandom { seed: 3 }] {
            let out = binarise(&[P, N], &strategy, 0).unwrap();
            assert_eq!(out, vec![BinaryLabel::Positive, BinaryLabel::Negative]);
        }
    }

    #[test]
    fn uncertain_maps_per_strategy() {
        assert_eq!(
            binarise(&[U], &Strategy::UOnes, 0).unwrap(),
            vec![BinaryLabel::Positive]
        );
        assert_eq!(
            binarise(&[U], &Strategy::UZeros, 0).unwrap(),
            vec![BinaryLabel::Negative]
        );
    }

    #[test]
    fn missing_labels_rejected() {
        assert!(matches!(
            binarise(&[TriLabel::Missing], &Strategy::UOnes, 0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn urandom_is_balanced_and_reproducible() {
        let labels = vec![U; 10_000];
        let strategy = Strategy::URandom { seed: 7 };
        let first = binarise(&labels, &strategy, CHEXPERT_STREAM).unwrap();
        let positives = first.iter().filter(|&&l| l == BinaryLabel::Positive).count();
        assert!(
            (4850..=5150).contains(&positives),
            "positive count {positives} outside 3-sigma bound"
        );
        // Frozen from the first seeded run; any drift in the stream
        // construction shows up here.
        assert_eq!(positives, 5078);
        let head: Vec<bool> = first[..16]
            .iter()
            .map(|&l| l == BinaryLabel::Positive)
            .collect();
        assert_eq!(
            head,
            vec![
                true, false, false, false, false, false, false, false, true, false, true, true,
                true, true, false, false
            ]
        );

        let again = binarise(&labels, &strategy, CHEXPERT_STREAM).unwrap();
        assert_eq!(first, again);
    }

    #[test]
    fn urandom_draw_depends_only_on_seed_stream_and_index() {
        let strategy = Strategy::URandom { seed: 11 };
        let a = binarise(&[U, U, U, U, U, U], &strategy, 0).unwrap();
        let b = binarise(&[P, N, P, N, P, U], &strategy, 0).unwrap();
        assert_eq!(a[5], b[5]);

        // Distinct streams get independent draws.
        let chex = binarise(&[U; 64], &strategy, CHEXPERT_STREAM).unwrap();
        let neg = binarise(&[U; 64], &strategy, NEGBIO_STREAM).unwrap();
        assert_ne!(chex, neg);
    }

    /// TLD truth table over all 9 three-class pairs, for the two
    /// deterministic strategies.
    #[test]
    fn tld_truth_table_u_ones_u_zeros() {
        let pairs = [
            (P, P),
            (P, N),
            (P, U),
            (N, P),
            (N, N),
            (N, U),
            (U, P),
            (U, N),
            (U, U),
        ];
        let expected_u_ones = [false, true, false, true, false, true, false, true, false];
        let expected_u_zeros = [false, true, true, true, false, false, true, false, false];

        for (strategy, expected) in [
            (Strategy::UOnes, expected_u_ones),
            (Strategy::UZeros, expected_u_zeros),
        ] {
            let studies: Vec<LabelledStudy> = pairs
                .iter()
                .enumerate()
                .map(|(i, &(c, n))| study(&format!("s{i}"), c, n))
                .collect();
            let indicators = compute_indicators(&studies, &strategy).unwrap();
            for (i, ind) in indicators.iter().enumerate() {
                assert_eq!(
                    ind.tld, expected[i],
                    "{:?} pair {:?}",
                    strategy, pairs[i]
                );
            }
        }
    }

    #[test]
    fn indicator_examples() {
        let studies = vec![study("a", P, P), study("b", U, N)];
        let indicators = compute_indicators(&studies, &Strategy::UOnes).unwrap();
        assert_eq!((indicators[0].tld, indicators[0].chex_uncertain, indicators[0].neg_uncertain), (false, false, false));
        assert_eq!((indicators[1].tld, indicators[1].chex_uncertain, indicators[1].neg_uncertain), (true, true, false));
    }

    #[test]
    fn uncertain_flags_are_strategy_independent() {
        let studies = vec![study("a", U, N), study("b", P, U), study("c", U, U)];
        let strategies = [
            Strategy::UOnes,
            Strategy::UZeros,
            Strategy::URandom { seed: 5 },
        ];
        let reference = compute_indicators(&studies, &strategies[0]).unwrap();
        for strategy in &strategies[1..] {
            let indicators = compute_indicators(&studies, strategy).unwrap();
            for (a, b) in reference.iter().zip(&indicators) {
                assert_eq!(a.chex_uncertain, b.chex_uncertain);
                assert_eq!(a.neg_uncertain, b.neg_uncertain);
            }
        }
    }

    #[test]
    fn double_uncertain_tld_rate_is_near_half_under_urandom() {
        let studies: Vec<LabelledStudy> = (0..10_000)
            .map(|i| study(&format!("s{i}"), U, U))
            .collect();
        let indicators =
            compute_indicators(&studies, &Strategy::URandom { seed: 9 }).unwrap();
        let rate =
            indicators.iter().filter(|i| i.tld).count() as f64 / indicators.len() as f64;
        assert!((0.485..=0.515).contains(&rate), "tld rate {rate}");
    }

    #[test]
    fn indicators_csv_roundtrip() {
        let studies = vec![study("a", P, P), study("b", U, N), study("c", N, U)];
        let indicators = compute_indicators(&studies, &Strategy::UZeros).unwrap();
        let mut buf = Vec::new();
        write_indicators_csv(&mut buf, &indicators).unwrap();
        let loaded = read_indicators_csv(buf.as_slice()).unwrap();
        assert_eq!(indicators, loaded);
    }
}
