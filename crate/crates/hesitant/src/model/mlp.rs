//! Forward pass, cross-entropy loss, and backpropagation for the
//! `input → hidden (tanh, dropout) → logistic` network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Arch, ForwardMode};
use crate::error::{Error, Result};
use crate::labels::BinaryLabel;
use crate::rng;

/// Probabilities are clamped to `[FLOOR, 1 − FLOOR]` inside the loss so
/// `log(0)` never occurs; gradients are zeroed where the clamp is active so
/// analytic gradients stay consistent with finite differences of the
/// clamped loss.
const PROB_FLOOR: f64 = 1e-12;

/// All parameters of the network. `w1` is `hidden_dim × input_dim`,
/// row-major; the output layer is `w2` (one weight per hidden unit) and the
/// scalar bias `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub arch: Arch,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpParams {
    /// Seeded initialization: weights uniform in `±1/√fan_in`, biases zero.
    pub fn init(arch: Arch, seed: u64) -> Self {
        let mut rng = rng::stream(seed, &[]);
        let d = arch.input_dim;
        let h = arch.hidden_dim;
        let bound1 = 1.0 / (d as f64).sqrt();
        let bound2 = 1.0 / (h as f64).sqrt();
        MlpParams {
            arch,
            w1: (0..h * d).map(|_| rng.gen_range(-bound1..bound1)).collect(),
            b1: vec![0.0; h],
            w2: (0..h).map(|_| rng.gen_range(-bound2..bound2)).collect(),
            b2: 0.0,
        }
    }

    pub fn zeros(arch: Arch) -> Self {
        MlpParams {
            arch,
            w1: vec![0.0; arch.hidden_dim * arch.input_dim],
            b1: vec![0.0; arch.hidden_dim],
            w2: vec![0.0; arch.hidden_dim],
            b2: 0.0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let finite = self.w1.iter().chain(&self.b1).chain(&self.w2).all(|v| v.is_finite())
            && self.b2.is_finite();
        if finite {
            Ok(())
        } else {
            Err(Error::Numeric("non-finite model parameter".into()))
        }
    }
}

/// Gradients (or any buffer) shaped like [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Gradients {
    pub fn zeros(arch: &Arch) -> Self {
        Gradients {
            w1: vec![0.0; arch.hidden_dim * arch.input_dim],
            b1: vec![0.0; arch.hidden_dim],
            w2: vec![0.0; arch.hidden_dim],
            b2: 0.0,
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in self.w1.iter_mut().chain(&mut self.b1).chain(&mut self.w2) {
            *v *= factor;
        }
        self.b2 *= factor;
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Hidden-layer dropout mask: `true` means the unit is kept. Drop
/// probability is `rate`, drawn from the stream addressed by `seed`.
fn dropout_mask(seed: u64, rate: f64, hidden_dim: usize) -> Vec<bool> {
    let mut rng = rng::stream(seed, &[]);
    (0..hidden_dim).map(|_| rng.gen::<f64>() >= rate).collect()
}

struct ForwardTrace {
    /// tanh activations before dropout.
    hidden: Vec<f64>,
    /// activations after mask-and-scale; equals `hidden` in deterministic mode.
    hidden_dropped: Vec<f64>,
    prob: f64,
}

fn forward_trace(params: &MlpParams, x: &[f64], mask: Option<&[bool]>) -> ForwardTrace {
    let d = params.arch.input_dim;
    let h = params.arch.hidden_dim;
    debug_assert_eq!(x.len(), d);

    let mut hidden = Vec::with_capacity(h);
    for unit in 0..h {
        let row = &params.w1[unit * d..(unit + 1) * d];
        let mut z = params.b1[unit];
        for (w, xv) in row.iter().zip(x) {
            z += w * xv;
        }
        hidden.push(z.tanh());
    }

    let hidden_dropped = match mask {
        None => hidden.clone(),
        Some(mask) => {
            let scale = 1.0 / (1.0 - params.arch.dropout_rate);
            hidden
                .iter()
                .zip(mask)
                .map(|(&a, &keep)| if keep { a * scale } else { 0.0 })
                .collect()
        }
    };

    let mut z = params.b2;
    for (w, a) in params.w2.iter().zip(&hidden_dropped) {
        z += w * a;
    }

    ForwardTrace {
        hidden,
        hidden_dropped,
        prob: sigmoid(z),
    }
}

fn mode_mask(params: &MlpParams, mode: ForwardMode, sample_idx: u64) -> Option<Vec<bool>> {
    match mode {
        ForwardMode::Deterministic => None,
        ForwardMode::StochasticDropout { seed } => Some(dropout_mask(
            rng::mix(seed, &[sample_idx]),
            params.arch.dropout_rate,
            params.arch.hidden_dim,
        )),
    }
}

/// Predicted probability for one feature vector.
pub fn forward(params: &MlpParams, x: &[f64], mode: ForwardMode) -> Result<f64> {
    params.check_finite()?;
    if x.len() != params.arch.input_dim {
        return Err(Error::validation(format!(
            "feature dimension {} does not match input_dim {}",
            x.len(),
            params.arch.input_dim
        )));
    }
    let mask = mode_mask(params, mode, 0);
    Ok(forward_trace(params, x, mask.as_deref()).prob)
}

/// Probability plus thresholded label. A probability exactly at the
/// threshold maps to `Positive`.
pub fn predict(params: &MlpParams, x: &[f64], threshold: f64) -> Result<(f64, BinaryLabel)> {
    let p = forward(params, x, ForwardMode::Deterministic)?;
    let label = if p >= threshold {
        BinaryLabel::Positive
    } else {
        BinaryLabel::Negative
    };
    Ok((p, label))
}

/// Mean binary cross-entropy over the batch and its gradients, computed by
/// backpropagation through the same forward mode (sample `k` of the batch
/// uses the mask stream addressed by `(mode seed, k)`, so repeated calls see
/// identical masks).
pub fn loss_and_grad(
    params: &MlpParams,
    xs: &[&[f64]],
    ys: &[bool],
    mode: ForwardMode,
) -> Result<(f64, Gradients)> {
    if xs.is_empty() {
        return Err(Error::validation("empty batch"));
    }
    if xs.len() != ys.len() {
        return Err(Error::validation("batch feature/label length mismatch"));
    }
    params.check_finite()?;

    let d = params.arch.input_dim;
    let h = params.arch.hidden_dim;
    let scale = 1.0 / (1.0 - params.arch.dropout_rate);

    let mut grads = Gradients::zeros(&params.arch);
    let mut loss = 0.0;
    let mut grad_hidden_pre = vec![0.0; h];

    for (k, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if x.len() != d {
            return Err(Error::validation(format!(
                "feature dimension {} does not match input_dim {d}",
                x.len()
            )));
        }
        let mask = mode_mask(params, mode, k as u64);
        let trace = forward_trace(params, x, mask.as_deref());
        let y_f = if y { 1.0 } else { 0.0 };

        let p = trace.prob;
        let p_clamped = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        loss -= y_f * p_clamped.ln() + (1.0 - y_f) * (1.0 - p_clamped).ln();

        // Where the clamp is active the clamped loss is locally flat.
        let grad_z = if p == p_clamped { p - y_f } else { 0.0 };
        if grad_z == 0.0 {
            continue;
        }

        grads.b2 += grad_z;
        for (gw2, &a) in grads.w2.iter_mut().zip(&trace.hidden_dropped) {
            *gw2 += grad_z * a;
        }
        for (unit, slot) in grad_hidden_pre.iter_mut().enumerate() {
            let keep_scale = match &mask {
                None => 1.0,
                Some(m) => {
                    if m[unit] {
                        scale
                    } else {
                        0.0
                    }
                }
            };
            let a = trace.hidden[unit];
            *slot = grad_z * params.w2[unit] * keep_scale * (1.0 - a * a);
        }
        for (unit, &g) in grad_hidden_pre.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads.b1[unit] += g;
            let row = &mut grads.w1[unit * d..(unit + 1) * d];
            for (gw, &xv) in row.iter_mut().zip(x) {
                *gw += g * xv;
            }
        }
    }

    let inv_n = 1.0 / xs.len() as f64;
    grads.scale(inv_n);
    Ok((loss * inv_n, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny_arch(dropout: f64) -> Arch {
        Arch {
            input_dim: 4,
            hidden_dim: 3,
            dropout_rate: dropout,
        }
    }

    #[test]
    fn zero_network_outputs_half() {
        let params = MlpParams::zeros(tiny_arch(0.0));
        let p = forward(&params, &[1.0, 2.0, 3.0, 4.0], ForwardMode::Deterministic).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn zero_dropout_stochastic_equals_deterministic() {
        let params = MlpParams::init(tiny_arch(0.0), 5);
        let x = [0.5, -1.0, 2.0, 0.25];
        let det = forward(&params, &x, ForwardMode::Deterministic).unwrap();
        let sto = forward(&params, &x, ForwardMode::StochasticDropout { seed: 99 }).unwrap();
        assert_eq!(det, sto);
    }

    #[test]
    fn stochastic_forward_is_reproducible() {
        let params = MlpParams::init(tiny_arch(0.5), 5);
        let x = [0.5, -1.0, 2.0, 0.25];
        let mode = ForwardMode::StochasticDropout { seed: 3 };
        let a = forward(&params, &x, mode).unwrap();
        let b = forward(&params, &x, mode).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn non_finite_params_rejected() {
        let mut params = MlpParams::init(tiny_arch(0.0), 5);
        params.w1[0] = f64::NAN;
        assert!(matches!(
            forward(&params, &[0.0; 4], ForwardMode::Deterministic),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn uniform_prediction_loss_is_ln2() {
        let params = MlpParams::zeros(tiny_arch(0.0));
        let xs: Vec<&[f64]> = vec![&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]];
        let (loss, _) =
            loss_and_grad(&params, &xs, &[true, false], ForwardMode::Deterministic).unwrap();
        assert_abs_diff_eq!(loss, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn confident_correct_predictions_have_tiny_loss() {
        let mut params = MlpParams::zeros(tiny_arch(0.0));
        // Push the output strongly through the bias.
        params.b2 = 60.0;
        let xs: Vec<&[f64]> = vec![&[0.0; 4]];
        let (loss, grads) =
            loss_and_grad(&params, &xs, &[true], ForwardMode::Deterministic).unwrap();
        assert!(loss < 1e-6, "loss {loss}");
        // Probability saturates to 1.0 and hits the clamp: gradient is flat.
        assert_eq!(grads.b2, 0.0);
    }

    #[test]
    fn tie_at_threshold_predicts_positive() {
        let params = MlpParams::zeros(tiny_arch(0.0));
        let (p, label) = predict(&params, &[0.0; 4], 0.5).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(label, BinaryLabel::Positive);

        let mut biased = params.clone();
        biased.b2 = 2.0;
        assert_eq!(predict(&biased, &[0.0; 4], 0.5).unwrap().1, BinaryLabel::Positive);
        biased.b2 = -2.0;
        assert_eq!(predict(&biased, &[0.0; 4], 0.5).unwrap().1, BinaryLabel::Negative);
    }

    /// Central finite differences of the batch loss with respect to one
    /// parameter, with the step scaled to the parameter's magnitude.
    fn numerical_grad(
        params: &MlpParams,
        xs: &[&[f64]],
        ys: &[bool],
        mode: ForwardMode,
        tweak: impl Fn(&mut MlpParams, f64),
        current: f64,
    ) -> f64 {
        let step = 1e-6 * current.abs().max(1.0);
        let mut plus = params.clone();
        tweak(&mut plus, step);
        let mut minus = params.clone();
        tweak(&mut minus, -step);
        let (loss_plus, _) = loss_and_grad(&plus, xs, ys, mode).unwrap();
        let (loss_minus, _) = loss_and_grad(&minus, xs, ys, mode).unwrap();
        (loss_plus - loss_minus) / (2.0 * step)
    }

    fn check_all_gradients(params: &MlpParams, xs: &[&[f64]], ys: &[bool], mode: ForwardMode) {
        let (_, grads) = loss_and_grad(params, xs, ys, mode).unwrap();
        let tol = 1e-5;
        let close = |analytic: f64, numeric: f64| {
            (analytic - numeric).abs() <= tol * analytic.abs().max(numeric.abs()).max(1.0)
        };

        for i in 0..params.w1.len() {
            let n = numerical_grad(params, xs, ys, mode, |p, d| p.w1[i] += d, params.w1[i]);
            assert!(close(grads.w1[i], n), "w1[{i}]: {} vs {n}", grads.w1[i]);
        }
        for i in 0..params.b1.len() {
            let n = numerical_grad(params, xs, ys, mode, |p, d| p.b1[i] += d, params.b1[i]);
            assert!(close(grads.b1[i], n), "b1[{i}]: {} vs {n}", grads.b1[i]);
        }
        for i in 0..params.w2.len() {
            let n = numerical_grad(params, xs, ys, mode, |p, d| p.w2[i] += d, params.w2[i]);
            assert!(close(grads.w2[i], n), "w2[{i}]: {} vs {n}", grads.w2[i]);
        }
        let n = numerical_grad(params, xs, ys, mode, |p, d| p.b2 += d, params.b2);
        assert!(close(grads.b2, n), "b2: {} vs {n}", grads.b2);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::Rng;
        let mut seed_rng = rng::stream(77, &[]);
        for trial in 0..4 {
            let arch = Arch {
                input_dim: 5,
                hidden_dim: 4,
                dropout_rate: 0.0,
            };
            let params = MlpParams::init(arch, seed_rng.gen());
            let raw: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..5).map(|_| seed_rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let xs: Vec<&[f64]> = raw.iter().map(|v: &Vec<f64>| v.as_slice()).collect();
            let ys: Vec<bool> = (0..6).map(|_| seed_rng.gen()).collect();
            check_all_gradients(&params, &xs, &ys, ForwardMode::Deterministic);
            let _ = trial;
        }
    }

    #[test]
    fn gradients_match_finite_differences_with_dropout() {
        use rand::Rng;
        let mut seed_rng = rng::stream(78, &[]);
        let arch = Arch {
            input_dim: 4,
            hidden_dim: 4,
            dropout_rate: 0.4,
        };
        let params = MlpParams::init(arch, 12);
        let raw: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..4).map(|_| seed_rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let xs: Vec<&[f64]> = raw.iter().map(|v: &Vec<f64>| v.as_slice()).collect();
        let ys = vec![true, false, true, true, false];
        // The mode carries the mask seed, so finite differences see the same
        // masks as the analytic gradient.
        check_all_gradients(&params, &xs, &ys, ForwardMode::StochasticDropout { seed: 41 });
    }

    #[test]
    fn dropout_mean_matches_deterministic_hidden_sum() {
        use rand::Rng;
        // Inverted dropout is unbiased on the pre-logistic hidden sum:
        // E[w2 · dropped(a)] = w2 · a.
        let arch = Arch {
            input_dim: 6,
            hidden_dim: 8,
            dropout_rate: 0.3,
        };
        let params = MlpParams::init(arch, 9);
        let mut x_rng = rng::stream(10, &[]);
        let x: Vec<f64> = (0..6).map(|_| x_rng.gen_range(-1.0..1.0)).collect();

        let det = forward_trace(&params, &x, None);
        let det_sum: f64 = params
            .w2
            .iter()
            .zip(&det.hidden)
            .map(|(w, a)| w * a)
            .sum::<f64>()
            + params.b2;

        let passes = 10_000;
        let mut samples = Vec::with_capacity(passes);
        for t in 0..passes {
            let mask = dropout_mask(rng::mix(55, &[t as u64]), arch.dropout_rate, arch.hidden_dim);
            let trace = forward_trace(&params, &x, Some(&mask));
            let z: f64 = params
                .w2
                .iter()
                .zip(&trace.hidden_dropped)
                .map(|(w, a)| w * a)
                .sum::<f64>()
                + params.b2;
            samples.push(z);
        }
        let mean = samples.iter().sum::<f64>() / passes as f64;
        let var = samples.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>()
            / (passes as f64 - 1.0);
        let stderr = (var / passes as f64).sqrt();
        assert!(
            (mean - det_sum).abs() <= 3.0 * stderr,
            "mean {mean} vs deterministic {det_sum} (3 se = {})",
            3.0 * stderr
        );
    }
}
