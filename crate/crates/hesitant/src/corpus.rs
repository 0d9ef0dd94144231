//! Data model, report/label ingestion, split handling, and the seeded
//! synthetic-corpus generator.
//!
//! File formats:
//! - `reports.jsonl`: one `{"study_id": "...", "text": "..."}` object per line
//! - `labels.csv`: header `study_id,split,chexpert,negbio`; label cells use
//!   the export coding `1.0` (positive), `0.0` (negative), `-1.0` (uncertain),
//!   empty (missing); splits are spelled `train|validate|test`

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// One labeller's verdict for the target observation.
///
/// `Missing` means the labeller emitted no verdict at all (blank cell).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriLabel {
    Positive,
    Negative,
    Uncertain,
    Missing,
}

impl TriLabel {
    fn from_code(cell: &str) -> Result<Self> {
        match cell {
            "1.0" => Ok(TriLabel::Positive),
            "0.0" => Ok(TriLabel::Negative),
            "-1.0" => Ok(TriLabel::Uncertain),
            "" => Ok(TriLabel::Missing),
            other => Err(Error::validation(format!("unknown label code {other:?}"))),
        }
    }

    fn to_code(self) -> &'static str {
        match self {
            TriLabel::Positive => "1.0",
            TriLabel::Negative => "0.0",
            TriLabel::Uncertain => "-1.0",
            TriLabel::Missing => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "train" => Ok(Split::Train),
            "validate" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::validation(format!("unknown split tag {other:?}"))),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validate",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One report joined with its split assignment and both labeller verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledStudy {
    pub study_id: String,
    pub split: Split,
    pub text: String,
    pub chexpert: TriLabel,
    pub negbio: TriLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    CertainPositive,
    CertainNegative,
    ExplicitUncertain,
    BorderlineDisagreement,
    RandomNoise,
}

/// Fractions over scenario kinds; must sum to 1 within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioMix {
    pub certain_positive: f64,
    pub certain_negative: f64,
    pub explicit_uncertain: f64,
    pub borderline_disagreement: f64,
    pub random_noise: f64,
}

impl Default for ScenarioMix {
    fn default() -> Self {
        ScenarioMix {
            certain_positive: 0.35,
            certain_negative: 0.35,
            explicit_uncertain: 0.20,
            borderline_disagreement: 0.10,
            random_noise: 0.0,
        }
    }
}

impl ScenarioMix {
    pub fn validate(&self) -> Result<()> {
        let fractions = self.fractions();
        if fractions.iter().any(|&(_, f)| !(0.0..=1.0).contains(&f)) {
            return Err(Error::validation("mix fractions must lie in [0, 1]"));
        }
        let sum: f64 = fractions.iter().map(|&(_, f)| f).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "mix fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    pub fn fractions(&self) -> [(ScenarioKind, f64); 5] {
        [
            (ScenarioKind::CertainPositive, self.certain_positive),
            (ScenarioKind::CertainNegative, self.certain_negative),
            (ScenarioKind::ExplicitUncertain, self.explicit_uncertain),
            (
                ScenarioKind::BorderlineDisagreement,
                self.borderline_disagreement,
            ),
            (ScenarioKind::RandomNoise, self.random_noise),
        ]
    }
}

/// Full synthetic generator configuration (the `gen` config file format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    pub mix: ScenarioMix,
    /// Train/validation/test proportions.
    pub split_fractions: [f64; 3],
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 1000,
            seed: 7,
            mix: ScenarioMix::default(),
            split_fractions: [0.80, 0.10, 0.10],
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n must be at least 1"));
        }
        self.mix.validate()?;
        let sum: f64 = self.split_fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize, Serialize)]
struct ReportLine {
    study_id: String,
    text: String,
}

/// Load `(study_id, text)` records from a JSONL file, preserving order.
pub fn load_reports(path: &Path) -> Result<Vec<(String, String)>> {
    load_reports_from_reader(BufReader::new(File::open(path)?))
}

pub fn load_reports_from_reader<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let parsed: ReportLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse(lineno, format!("bad report record: {e}")))?;
        if !seen.insert(parsed.study_id.clone()) {
            return Err(Error::validation(format!(
                "duplicate study_id {:?} at line {lineno}",
                parsed.study_id
            )));
        }
        records.push((parsed.study_id, parsed.text));
    }
    Ok(records)
}

/// One row of the label file; `Missing` verdicts are preserved here and
/// filtered at join time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub study_id: String,
    pub split: Split,
    pub chexpert: TriLabel,
    pub negbio: TriLabel,
}

const LABEL_HEADER: [&str; 4] = ["study_id", "split", "chexpert", "negbio"];

/// Load labeller verdicts and split assignments from a CSV file.
pub fn load_labels(path: &Path) -> Result<Vec<LabelRow>> {
    load_labels_from_reader(File::open(path)?)
}

pub fn load_labels_from_reader<R: Read>(reader: R) -> Result<Vec<LabelRow>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != LABEL_HEADER {
        return Err(Error::validation(format!(
            "label file header must be exactly {:?}, got {:?}",
            LABEL_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let lineno = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        if record.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected 4 fields, got {}", record.len()),
            ));
        }
        let at_line = |e: Error| match e {
            Error::Validation(msg) => Error::parse(lineno, msg),
            other => other,
        };
        rows.push(LabelRow {
            study_id: record[0].to_string(),
            split: Split::from_tag(&record[1]).map_err(at_line)?,
            chexpert: TriLabel::from_code(&record[2]).map_err(at_line)?,
            negbio: TriLabel::from_code(&record[3]).map_err(at_line)?,
        });
    }
    Ok(rows)
}

/// Exclusion counts produced by [`join_and_filter`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinSummary {
    /// Reports with no matching label row.
    pub reports_without_labels: usize,
    /// Label rows with no matching report.
    pub labels_without_reports: usize,
    /// Joined studies excluded because the CheXpert verdict is missing.
    pub missing_chexpert: usize,
    /// Joined studies excluded because the NegBio verdict is missing.
    pub missing_negbio: usize,
    /// Joined studies excluded because the report text is empty.
    pub empty_text: usize,
}

/// Inner-join reports with labels on `study_id`, excluding studies where
/// either labeller is missing or the text is empty. Report order is kept.
pub fn join_and_filter(
    reports: &[(String, String)],
    labels: &[LabelRow],
) -> (Vec<LabelledStudy>, JoinSummary) {
    let by_id: HashMap<&str, &LabelRow> =
        labels.iter().map(|row| (row.study_id.as_str(), row)).collect();
    let report_ids: HashSet<&str> = reports.iter().map(|(id, _)| id.as_str()).collect();

    let mut summary = JoinSummary {
        labels_without_reports: labels
            .iter()
            .filter(|row| !report_ids.contains(row.study_id.as_str()))
            .count(),
        ..JoinSummary::default()
    };

    let mut studies = Vec::new();
    for (study_id, text) in reports {
        let Some(row) = by_id.get(study_id.as_str()) else {
            summary.reports_without_labels += 1;
            continue;
        };
        let chex_missing = row.chexpert == TriLabel::Missing;
        let neg_missing = row.negbio == TriLabel::Missing;
        if chex_missing {
            summary.missing_chexpert += 1;
        }
        if neg_missing {
            summary.missing_negbio += 1;
        }
        if chex_missing || neg_missing {
            continue;
        }
        if text.trim().is_empty() {
            summary.empty_text += 1;
            continue;
        }
        studies.push(LabelledStudy {
            study_id: study_id.clone(),
            split: row.split,
            text: text.clone(),
            chexpert: row.chexpert,
            negbio: row.negbio,
        });
    }
    (studies, summary)
}

/// Split studies into (train, validation, test), preserving relative order.
pub fn partition(
    studies: Vec<LabelledStudy>,
) -> (Vec<LabelledStudy>, Vec<LabelledStudy>, Vec<LabelledStudy>) {
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for study in studies {
        match study.split {
            Split::Train => train.push(study),
            Split::Validation => validation.push(study),
            Split::Test => test.push(study),
        }
    }
    (train, validation, test)
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct Templates {
    #[allow(dead_code)]
    version: u32,
    certain_positive: Vec<String>,
    certain_negative: Vec<String>,
    explicit_uncertain: Vec<String>,
    borderline_disagreement: Vec<String>,
    random_noise: Vec<String>,
    fillers: Vec<String>,
}

fn templates() -> &'static Templates {
    static T: OnceLock<Templates> = OnceLock::new();
    T.get_or_init(|| {
        serde_json::from_str(include_str!("../data/templates.json"))
            .expect("bundled template file is valid")
    })
}

/// Generate a synthetic corpus with default split proportions (0.80/0.10/0.10).
///
/// Pure function of `(n, mix, seed)`: each study is drawn from its own
/// counter-based stream, so generation order never affects the output.
pub fn generate_synthetic(n: usize, mix: &ScenarioMix, seed: u64) -> Result<Vec<LabelledStudy>> {
    generate(&SyntheticSpec {
        n,
        seed,
        mix: *mix,
        ..SyntheticSpec::default()
    })
}

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<LabelledStudy>> {
    spec.validate()?;
    Ok((0..spec.n).map(|i| generate_study(spec, i)).collect())
}

/// Replay only the scenario draw for each study index.
pub fn scenario_kinds(n: usize, mix: &ScenarioMix, seed: u64) -> Result<Vec<ScenarioKind>> {
    mix.validate()?;
    Ok((0..n)
        .map(|i| {
            let mut rng = rng::stream(seed, &[i as u64]);
            pick_scenario(mix, rng.gen::<f64>())
        })
        .collect())
}

fn pick_scenario(mix: &ScenarioMix, u: f64) -> ScenarioKind {
    let fractions = mix.fractions();
    let mut cumulative = 0.0;
    for &(kind, f) in &fractions {
        cumulative += f;
        if u < cumulative {
            return kind;
        }
    }
    // Rounding can leave u just past the final cumulative sum.
    fractions[4].0
}

fn generate_study(spec: &SyntheticSpec, index: usize) -> LabelledStudy {
    let mut rng = rng::stream(spec.seed, &[index as u64]);
    let scenario = pick_scenario(&spec.mix, rng.gen::<f64>());

    let split_draw = rng.gen::<f64>();
    let split = if split_draw < spec.split_fractions[0] {
        Split::Train
    } else if split_draw < spec.split_fractions[0] + spec.split_fractions[1] {
        Split::Validation
    } else {
        Split::Test
    };

    let t = templates();
    let pool = match scenario {
        ScenarioKind::CertainPositive => &t.certain_positive,
        ScenarioKind::CertainNegative => &t.certain_negative,
        ScenarioKind::ExplicitUncertain => &t.explicit_uncertain,
        ScenarioKind::BorderlineDisagreement => &t.borderline_disagreement,
        ScenarioKind::RandomNoise => &t.random_noise,
    };
    let body = &pool[rng.gen_range(0..pool.len())];
    let mut text = format!("FINAL REPORT\n{body}");
    if rng.gen::<bool>() {
        let filler = &t.fillers[rng.gen_range(0..t.fillers.len())];
        text.push('\n');
        text.push_str(filler);
    }

    let (chexpert, negbio) = match scenario {
        ScenarioKind::CertainPositive => (TriLabel::Positive, TriLabel::Positive),
        ScenarioKind::CertainNegative => (TriLabel::Negative, TriLabel::Negative),
        ScenarioKind::ExplicitUncertain => (TriLabel::Uncertain, TriLabel::Uncertain),
        ScenarioKind::BorderlineDisagreement => (TriLabel::Negative, TriLabel::Uncertain),
        ScenarioKind::RandomNoise => (random_tri(&mut rng), random_tri(&mut rng)),
    };

    LabelledStudy {
        study_id: format!("s{index:06}"),
        split,
        text,
        chexpert,
        negbio,
    }
}

fn random_tri<R: Rng>(rng: &mut R) -> TriLabel {
    match rng.gen_range(0..3u8) {
        0 => TriLabel::Positive,
        1 => TriLabel::Negative,
        _ => TriLabel::Uncertain,
    }
}

// ---------------------------------------------------------------------------
// Corpus file output
// ---------------------------------------------------------------------------

pub fn write_reports_jsonl<W: Write>(mut writer: W, studies: &[LabelledStudy]) -> Result<()> {
    for study in studies {
        let line = serde_json::to_string(&ReportLine {
            study_id: study.study_id.clone(),
            text: study.text.clone(),
        })?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn write_labels_csv<W: Write>(writer: W, studies: &[LabelledStudy]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LABEL_HEADER)?;
    for study in studies {
        w.write_record([
            study.study_id.as_str(),
            study.split.tag(),
            study.chexpert.to_code(),
            study.negbio.to_code(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Load a corpus from `reports.jsonl` + `labels.csv` and join.
pub fn load_corpus(
    reports_path: &Path,
    labels_path: &Path,
) -> Result<(Vec<LabelledStudy>, JoinSummary)> {
    let reports = load_reports(reports_path)?;
    let labels = load_labels(labels_path)?;
    Ok(join_and_filter(&reports, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reports_fixture() -> Vec<(String, String)> {
        vec![
            ("a".into(), "No edema.".into()),
            ("b".into(), "Borderline heart.".into()),
            ("c".into(), "Edema present.".into()),
        ]
    }

    #[test]
    fn load_reports_roundtrip() {
        let jsonl = "{\"study_id\":\"a\",\"text\":\"one\"}\n{\"study_id\":\"b\",\"text\":\"two\"}\n";
        let records = load_reports_from_reader(jsonl.as_bytes()).unwrap();
        assert_eq!(
            records,
            vec![("a".into(), "one".into()), ("b".into(), "two".into())]
        );
    }

    #[test]
    fn empty_report_file_is_empty_sequence() {
        assert!(load_reports_from_reader("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn missing_text_field_names_the_line() {
        let jsonl = "{\"study_id\":\"a\",\"text\":\"one\"}\n{\"study_id\":\"b\"}\n";
        match load_reports_from_reader(jsonl.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_study_id_rejected() {
        let jsonl = "{\"study_id\":\"a\",\"text\":\"one\"}\n{\"study_id\":\"a\",\"text\":\"two\"}\n";
        assert!(matches!(
            load_reports_from_reader(jsonl.as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn label_codes_map_to_trilabels() {
        let csv = "study_id,split,chexpert,negbio\na,train,1.0,0.0\nb,validate,-1.0,\n";
        let rows = load_labels_from_reader(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].chexpert, TriLabel::Positive);
        assert_eq!(rows[0].negbio, TriLabel::Negative);
        assert_eq!(rows[0].split, Split::Train);
        assert_eq!(rows[1].chexpert, TriLabel::Uncertain);
        assert_eq!(rows[1].negbio, TriLabel::Missing);
        assert_eq!(rows[1].split, Split::Validation);
    }

    #[test]
    fn unknown_code_and_split_rejected() {
        let bad_code = "study_id,split,chexpert,negbio\na,train,2.0,0.0\n";
        assert!(load_labels_from_reader(bad_code.as_bytes()).is_err());

        let bad_split = "study_id,split,chexpert,negbio\na,val,1.0,0.0\n";
        assert!(load_labels_from_reader(bad_split.as_bytes()).is_err());

        let bad_header = "id,split,chexpert,negbio\na,train,1.0,0.0\n";
        assert!(load_labels_from_reader(bad_header.as_bytes()).is_err());
    }

    #[test]
    fn join_excludes_missing_and_reports_counts() {
        let reports = reports_fixture();
        let labels = vec![
            LabelRow {
                study_id: "a".into(),
                split: Split::Train,
                chexpert: TriLabel::Missing,
                negbio: TriLabel::Negative,
            },
            LabelRow {
                study_id: "b".into(),
                split: Split::Train,
                chexpert: TriLabel::Negative,
                negbio: TriLabel::Uncertain,
            },
        ];
        let (studies, summary) = join_and_filter(&reports, &labels);
        assert_eq!(studies.len(), 1);
        assert_eq!(studies[0].study_id, "b");
        assert_eq!(summary.missing_chexpert, 1);
        assert_eq!(summary.reports_without_labels, 1);
    }

    #[test]
    fn join_on_disjoint_keys_is_empty_with_counts() {
        let reports = vec![("x".into(), "text".into())];
        let labels = vec![LabelRow {
            study_id: "y".into(),
            split: Split::Test,
            chexpert: TriLabel::Positive,
            negbio: TriLabel::Positive,
        }];
        let (studies, summary) = join_and_filter(&reports, &labels);
        assert!(studies.is_empty());
        assert_eq!(summary.reports_without_labels, 1);
        assert_eq!(summary.labels_without_reports, 1);
    }

    #[test]
    fn join_output_has_no_missing_labels() {
        let corpus = generate_synthetic(
            500,
            &ScenarioMix {
                random_noise: 1.0,
                certain_positive: 0.0,
                certain_negative: 0.0,
                explicit_uncertain: 0.0,
                borderline_disagreement: 0.0,
            },
            3,
        )
        .unwrap();
        for study in &corpus {
            assert_ne!(study.chexpert, TriLabel::Missing);
            assert_ne!(study.negbio, TriLabel::Missing);
            assert!(!study.text.is_empty());
        }
    }

    #[test]
    fn partition_respects_tags_and_order() {
        let mk = |id: &str, split| LabelledStudy {
            study_id: id.into(),
            split,
            text: "t".into(),
            chexpert: TriLabel::Positive,
            negbio: TriLabel::Positive,
        };
        let studies = vec![
            mk("1", Split::Train),
            mk("2", Split::Train),
            mk("3", Split::Validation),
            mk("4", Split::Test),
        ];
        let (train, val, test) = partition(studies);
        assert_eq!(
            (train.len(), val.len(), test.len()),
            (2, 1, 1)
        );
        assert_eq!(train[0].study_id, "1");
        assert_eq!(train[1].study_id, "2");

        let all_train = vec![mk("1", Split::Train), mk("2", Split::Train)];
        let (train, val, test) = partition(all_train);
        assert_eq!((train.len(), val.len(), test.len()), (2, 0, 0));
    }

    #[test]
    fn pure_mix_yields_pure_labels() {
        let mix = ScenarioMix {
            certain_positive: 1.0,
            certain_negative: 0.0,
            explicit_uncertain: 0.0,
            borderline_disagreement: 0.0,
            random_noise: 0.0,
        };
        for study in generate_synthetic(50, &mix, 9).unwrap() {
            assert_eq!(study.chexpert, TriLabel::Positive);
            assert_eq!(study.negbio, TriLabel::Positive);
        }
    }

    #[test]
    fn generation_is_byte_identical_per_seed() {
        let mix = ScenarioMix::default();
        let a = generate_synthetic(200, &mix, 11).unwrap();
        let b = generate_synthetic(200, &mix, 11).unwrap();
        assert_eq!(a, b);

        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_reports_jsonl(&mut buf_a, &a).unwrap();
        write_reports_jsonl(&mut buf_b, &b).unwrap();
        assert_eq!(buf_a, buf_b);

        let c = generate_synthetic(200, &mix, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uncertain_fraction_within_binomial_bound() {
        let mix = ScenarioMix {
            certain_positive: 0.4,
            certain_negative: 0.4,
            explicit_uncertain: 0.2,
            borderline_disagreement: 0.0,
            random_noise: 0.0,
        };
        let corpus = generate_synthetic(10_000, &mix, 5).unwrap();
        let uncertain = corpus
            .iter()
            .filter(|s| s.chexpert == TriLabel::Uncertain)
            .count();
        assert!(
            (1883..=2117).contains(&uncertain),
            "uncertain count {uncertain} outside 3-sigma bound"
        );
    }

    #[test]
    fn borderline_studies_always_disagree() {
        let mix = ScenarioMix {
            certain_positive: 0.0,
            certain_negative: 0.0,
            explicit_uncertain: 0.0,
            borderline_disagreement: 1.0,
            random_noise: 0.0,
        };
        for study in generate_synthetic(100, &mix, 21).unwrap() {
            assert_ne!(study.chexpert, study.negbio);
            assert_eq!(study.chexpert, TriLabel::Negative);
            assert_eq!(study.negbio, TriLabel::Uncertain);
            assert!(study.text.to_lowercase().contains("borderline"));
        }
    }

    #[test]
    fn scenario_kinds_replays_generation() {
        let mix = ScenarioMix::default();
        let corpus = generate_synthetic(300, &mix, 17).unwrap();
        let kinds = scenario_kinds(300, &mix, 17).unwrap();
        for (study, kind) in corpus.iter().zip(&kinds) {
            let expected = match kind {
                ScenarioKind::CertainPositive => (TriLabel::Positive, TriLabel::Positive),
                ScenarioKind::CertainNegative => (TriLabel::Negative, TriLabel::Negative),
                ScenarioKind::ExplicitUncertain => (TriLabel::Uncertain, TriLabel::Uncertain),
                ScenarioKind::BorderlineDisagreement => (TriLabel::Negative, TriLabel::Uncertain),
                ScenarioKind::RandomNoise => continue,
            };
            assert_eq!((study.chexpert, study.negbio), expected);
        }
    }

    #[test]
    fn invalid_mix_rejected() {
        let mix = ScenarioMix {
            certain_positive: 0.9,
            certain_negative: 0.0,
            explicit_uncertain: 0.0,
            borderline_disagreement: 0.0,
            random_noise: 0.0,
        };
        assert!(matches!(
            generate_synthetic(10, &mix, 1),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn corpus_files_roundtrip() {
        let corpus = generate_synthetic(40, &ScenarioMix::default(), 13).unwrap();
        let mut reports = Vec::new();
        let mut labels = Vec::new();
        write_reports_jsonl(&mut reports, &corpus).unwrap();
        write_labels_csv(&mut labels, &corpus).unwrap();

        let loaded_reports = load_reports_from_reader(reports.as_slice()).unwrap();
        let loaded_labels = load_labels_from_reader(labels.as_slice()).unwrap();
        let (studies, summary) = join_and_filter(&loaded_reports, &loaded_labels);
        assert_eq!(studies, corpus);
        assert_eq!(summary, JoinSummary::default());
    }

    proptest! {
        #[test]
        fn partition_is_a_partition(tags in proptest::collection::vec(0u8..3, 0..60)) {
            let studies: Vec<LabelledStudy> = tags.iter().enumerate().map(|(i, &t)| LabelledStudy {
                study_id: format!("s{i}"),
                split: match t { 0 => Split::Train, 1 => Split::Validation, _ => Split::Test },
                text: "x".into(),
                chexpert: TriLabel::Positive,
                negbio: TriLabel::Positive,
            }).collect();
            let n = studies.len();
            let (train, val, test) = partition(studies);
            prop_assert_eq!(train.len() + val.len() + test.len(), n);
            // Order preservation within each part implies ids are increasing.
            for part in [&train, &val, &test] {
                let ids: Vec<usize> = part.iter().map(|s| s.study_id[1..].parse().unwrap()).collect();
                prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
            }
            // Disjointness: every id appears exactly once overall.
            let mut all: Vec<&str> = train.iter().chain(&val).chain(&test).map(|s| s.study_id.as_str()).collect();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), n);
        }
    }
}
