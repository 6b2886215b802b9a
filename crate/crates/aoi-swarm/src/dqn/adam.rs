//! Adam with bias-corrected first and second moments.

use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> Self {
        AdamState {
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update of `net` in place.
pub fn adam_step(net: &mut Mlp, grads: &Gradients, state: &mut AdamState, learning_rate: f64) {
    state.step += 1;
    let b1 = state.beta1;
    let b2 = state.beta2;
    let bias1 = 1.0 - b1.powi(state.step as i32);
    let bias2 = 1.0 - b2.powi(state.step as i32);
    for (l, layer) in net.layers.iter_mut().enumerate() {
        for (params, grad, m, v) in [
            (
                &mut layer.weights,
                &grads.weights[l],
                &mut state.m.weights[l],
                &mut state.v.weights[l],
            ),
            (
                &mut layer.bias,
                &grads.biases[l],
                &mut state.m.biases[l],
                &mut state.v.biases[l],
            ),
        ] {
            for i in 0..params.len() {
                let g = grad[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                params[i] -= learning_rate * m_hat / (v_hat.sqrt() + state.eps);
            }
        }
    }
}
