//! AdamW with decoupled weight decay.
//!
//! Per parameter w with gradient g:
//!
//! ```text
//! m ← β₁·m + (1−β₁)·g
//! v ← β₂·v + (1−β₂)·g²
//! m̂ = m / (1−β₁ᵗ),  v̂ = v / (1−β₂ᵗ)
//! w ← w − lr·m̂/(√v̂ + ε) − lr·λ·w
//! ```
//!
//! The decay term is applied to the weights directly, not mixed into the
//! gradient, so `λ = 0` reduces bitwise to plain Adam.

use super::mlp::{Gradients, MlpParams};
use super::TrainConfig;

/// First/second-moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamWState {
    pub m: Gradients,
    pub v: Gradients,
    /// Completed steps; incremented before each use.
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
}

impl AdamWState {
    pub fn new(params: &MlpParams) -> Self {
        AdamWState {
            m: Gradients::zeros(&params.arch),
            v: Gradients::zeros(&params.arch),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
        }
    }
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn update_one(
    w: &mut f64,
    g: f64,
    m: &mut f64,
    v: &mut f64,
    bias1: f64,
    bias2: f64,
    beta1: f64,
    beta2: f64,
    config: &TrainConfig,
) {
    *m = beta1 * *m + (1.0 - beta1) * g;
    *v = beta2 * *v + (1.0 - beta2) * g * g;
    let m_hat = *m / bias1;
    let v_hat = *v / bias2;
    *w = *w
        - config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon)
        - config.learning_rate * config.weight_decay * *w;
}

/// Advance the optimizer one step, updating `params` in place.
pub fn adamw_step(
    state: &mut AdamWState,
    params: &mut MlpParams,
    grads: &Gradients,
    config: &TrainConfig,
) {
    state.t += 1;
    let bias1 = 1.0 - state.beta1.powi(state.t as i32);
    let bias2 = 1.0 - state.beta2.powi(state.t as i32);
    let (beta1, beta2) = (state.beta1, state.beta2);

    for ((w, &g), (m, v)) in params
        .w1
        .iter_mut()
        .zip(&grads.w1)
        .zip(state.m.w1.iter_mut().zip(state.v.w1.iter_mut()))
    {
        update_one(w, g, m, v, bias1, bias2, beta1, beta2, config);
    }
    for ((w, &g), (m, v)) in params
        .b1
        .iter_mut()
        .zip(&grads.b1)
        .zip(state.m.b1.iter_mut().zip(state.v.b1.iter_mut()))
    {
        update_one(w, g, m, v, bias1, bias2, beta1, beta2, config);
    }
    for ((w, &g), (m, v)) in params
        .w2
        .iter_mut()
        .zip(&grads.w2)
        .zip(state.m.w2.iter_mut().zip(state.v.w2.iter_mut()))
    {
        update_one(w, g, m, v, bias1, bias2, beta1, beta2, config);
    }
    update_one(
        &mut params.b2,
        grads.b2,
        &mut state.m.b2,
        &mut state.v.b2,
        bias1,
        bias2,
        beta1,
        beta2,
        config,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Arch;

    fn one_param_setup() -> (MlpParams, Gradients) {
        let arch = Arch {
            input_dim: 2,
            hidden_dim: 1,
            dropout_rate: 0.0,
        };
        (MlpParams::zeros(arch), Gradients::zeros(&arch))
    }

    #[test]
    fn zero_grad_zero_decay_is_identity() {
        let (mut params, grads) = one_param_setup();
        params.w1 = vec![0.25, -0.75];
        let before = params.clone();
        let config = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::default()
        };
        let mut state = AdamWState::new(&params);
        adamw_step(&mut state, &mut params, &grads, &config);
        assert_eq!(params, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn decoupled_decay_single_step() {
        let (mut params, grads) = one_param_setup();
        params.w1 = vec![1.0, 1.0];
        let config = TrainConfig {
            learning_rate: 0.1,
            weight_decay: 0.1,
            ..TrainConfig::default()
        };
        let mut state = AdamWState::new(&params);
        adamw_step(&mut state, &mut params, &grads, &config);
        assert_eq!(params.w1, vec![0.99, 0.99]);
    }

    #[test]
    fn zero_learning_rate_is_identity_on_params() {
        let (mut params, mut grads) = one_param_setup();
        params.w1 = vec![0.5, -0.5];
        grads.w1 = vec![1.0, -2.0];
        let before = params.clone();
        let config = TrainConfig {
            learning_rate: 0.0,
            weight_decay: 0.3,
            ..TrainConfig::default()
        };
        let mut state = AdamWState::new(&params);
        adamw_step(&mut state, &mut params, &grads, &config);
        assert_eq!(params, before);
        // Moments still advance.
        assert_ne!(state.m.w1, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_gradient_step_size_approaches_lr() {
        let (mut params, mut grads) = one_param_setup();
        params.w1 = vec![0.0, 0.0];
        grads.w1 = vec![0.37, -1.9];
        let config = TrainConfig {
            learning_rate: 0.01,
            weight_decay: 0.0,
            ..TrainConfig::default()
        };
        let mut state = AdamWState::new(&params);
        let mut prev = params.w1.clone();
        let mut last_step = vec![0.0; 2];
        for _ in 0..1000 {
            adamw_step(&mut state, &mut params, &grads, &config);
            last_step = params
                .w1
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).abs())
                .collect();
            prev = params.w1.clone();
        }
        for step in last_step {
            assert!(
                (step - config.learning_rate).abs() / config.learning_rate < 0.01,
                "step {step} is not within 1% of lr"
            );
        }
    }

    /// Reference Adam without any decay term, for bitwise comparison.
    fn adam_reference(w: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &TrainConfig) {
        let bias1 = 1.0 - 0.9f64.powi(t as i32);
        let bias2 = 1.0 - 0.999f64.powi(t as i32);
        for i in 0..w.len() {
            m[i] = 0.9 * m[i] + (1.0 - 0.9) * g[i];
            v[i] = 0.999 * v[i] + (1.0 - 0.999) * g[i] * g[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            w[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }

    #[test]
    fn zero_decay_matches_adam_bitwise_over_100_steps() {
        use rand::Rng;
        let (mut params, _) = one_param_setup();
        params.w1 = vec![0.8, -1.3];
        let config = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::default()
        };

        let mut ref_w = params.w1.clone();
        let mut ref_m = vec![0.0; 2];
        let mut ref_v = vec![0.0; 2];

        let mut state = AdamWState::new(&params);
        let mut grad_rng = crate::rng::stream(4, &[]);
        for t in 1..=100u64 {
            let g: Vec<f64> = (0..2).map(|_| grad_rng.gen_range(-1.0..1.0)).collect();
            let mut grads = Gradients::zeros(&params.arch);
            grads.w1 = g.clone();
            adamw_step(&mut state, &mut params, &grads, &config);
            adam_reference(&mut ref_w, &g, &mut ref_m, &mut ref_v, t, &config);
        }
        for (a, b) in params.w1.iter().zip(&ref_w) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
