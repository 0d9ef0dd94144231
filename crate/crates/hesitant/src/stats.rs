//! Classification metrics and point-biserial correlation with significance.
//!
//! All statistics are computed in 64-bit arithmetic with two-pass
//! mean/variance so corpora in the tens of thousands of studies do not lose
//! precision to naive summation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::BinaryLabel;

/// Binary confusion counts. `true_pos + false_pos + true_neg + false_neg = N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Accuracy/precision/recall/F1 over a prediction run.
///
/// Ratios with a zero denominator are reported as absent rather than 0 or
/// NaN; the confusion counts are always populated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub confusion: ConfusionCounts,
}

/// F1 as the harmonic mean of precision and recall.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    2.0 * precision * recall / (precision + recall)
}

/// Compare predictions against ground truth, treating `Positive` as the
/// positive class.
pub fn classification_metrics(
    pred: &[BinaryLabel],
    truth: &[BinaryLabel],
) -> Result<ClassificationMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::validation(format!(
            "prediction/truth length mismatch: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::validation("empty prediction sequence"));
    }

    let mut c = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (BinaryLabel::Positive, BinaryLabel::Positive) => c.true_pos += 1,
            (BinaryLabel::Positive, BinaryLabel::Negative) => c.false_pos += 1,
            (BinaryLabel::Negative, BinaryLabel::Negative) => c.true_neg += 1,
            (BinaryLabel::Negative, BinaryLabel::Positive) => c.false_neg += 1,
        }
    }

    let n = c.total() as f64;
    let accuracy = (c.true_pos + c.true_neg) as f64 / n;
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(f1_score(p, r)),
        _ => None,
    };

    Ok(ClassificationMetrics {
        accuracy,
        precision,
        recall,
        f1,
        confusion: c,
    })
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Group statistics behind the point-biserial closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// Mean of y over the x = 1 group.
    pub mean_y1: f64,
    /// Mean of y over the x = 0 group.
    pub mean_y0: f64,
    /// Sample standard deviation of all y.
    pub std_y: f64,
    pub n1: usize,
    pub n0: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r_pb: f64,
    pub p_value: f64,
    pub group_stats: GroupStats,
}

/// Point-biserial correlation between a continuous `y` and a dichotomous `x`.
///
/// `r_pb = ((ȳ1 − ȳ0) / s_y) · √(n1·n0 / (N·(N−1)))` with `s_y` the sample
/// standard deviation of all y; algebraically identical to the Pearson
/// correlation of y against x coded as 0/1. The two-sided p-value uses the
/// exact transform `t = r·√((N−2)/(1−r²))` with N−2 degrees of freedom.
pub fn point_biserial(y: &[f64], x: &[bool]) -> Result<CorrelationResult> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::validation(format!(
            "y/x length mismatch: {} vs {}",
            n,
            x.len()
        )));
    }
    if n < 3 {
        return Err(Error::validation(format!(
            "point-biserial needs at least 3 observations, got {n}"
        )));
    }
    let n1 = x.iter().filter(|&&b| b).count();
    let n0 = n - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::UndefinedCorrelation(
            "x takes a single value; the dichotomy has zero variance".into(),
        ));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::UndefinedCorrelation("y is constant".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in y".into()));
    }

    let (mut sum1, mut sum0) = (0.0, 0.0);
    for (&v, &b) in y.iter().zip(x) {
        if b {
            sum1 += v;
        } else {
            sum0 += v;
        }
    }
    let mean_y1 = sum1 / n1 as f64;
    let mean_y0 = sum0 / n0 as f64;
    let (_, std_y) = mean_and_sample_std(y);

    let nf = n as f64;
    let size_factor = ((n1 as f64) * (n0 as f64) / (nf * (nf - 1.0))).sqrt();
    let r_pb = (((mean_y1 - mean_y0) / std_y) * size_factor).clamp(-1.0, 1.0);

    let p_value = if 1.0 - r_pb * r_pb <= 0.0 {
        0.0
    } else {
        let t = r_pb * ((nf - 2.0) / (1.0 - r_pb * r_pb)).sqrt();
        student_t_sf(t, n - 2)?
    };

    Ok(CorrelationResult {
        r_pb,
        p_value,
        group_stats: GroupStats {
            mean_y1,
            mean_y0,
            std_y,
            n1,
            n0,
            n,
        },
    })
}

/// Two-pass mean and sample (n−1) standard deviation.
pub fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 2, "sample std needs at least 2 values");
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n as f64 - 1.0)).sqrt())
}

/// Two-sided survival probability `2·P(T ≥ |t|)` for Student's t with `df`
/// degrees of freedom, via the regularized incomplete beta function.
pub fn student_t_sf(t: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::validation("degrees of freedom must be at least 1"));
    }
    if !t.is_finite() {
        return Ok(0.0);
    }
    let v = df as f64;
    let x = v / (v + t * t);
    let p = regularized_inc_beta(v / 2.0, 0.5, x);
    Ok(p.clamp(0.0, 1.0))
}

/// Regularized incomplete beta `I_x(a, b)`, continued-fraction evaluation.
pub(crate) fn regularized_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // Continued fraction converges fastest below the distribution mean;
    // use the symmetry I_x(a,b) = 1 − I_{1−x}(b,a) on the other side.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3.0e-16;
    const TINY: f64 = 1.0e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;

        let num = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let num = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Log-gamma via the Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    use std::f64::consts::PI;
    const COEF: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula for the left half-plane.
        PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = 0.999_999_999_999_809_9;
        for (i, &c) in COEF.iter().enumerate() {
            acc += c / (x + i as f64 + 1.0);
        }
        let t = x + 7.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}
