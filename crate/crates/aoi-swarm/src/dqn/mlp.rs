//! Fully connected Q-network with rectifier hidden layers, an identity
//! output layer, and hand-written backpropagation.
//!
//! Forward and backward passes increment a caller-supplied multiply-
//! accumulate counter: one unit per weight touched on the forward pass and
//! two per weight on the backward pass (the input-gradient and
//! weight-gradient products).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mdp::Transition;

/// Hidden layer widths shared by every learner.
pub const HIDDEN_WIDTHS: [usize; 3] = [64, 128, 64];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Row-major `[out][in]` weight matrix.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub in_width: usize,
    pub out_width: usize,
}

/// Dot product with four accumulators; fixed summation order keeps results
/// bit-reproducible while giving the optimizer instruction-level parallelism.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut rest = 0.0;
    for j in chunks * 4..a.len() {
        rest += a[j] * b[j];
    }
    (s0 + s1) + (s2 + s3) + rest
}

impl Layer {
    fn matvec(&self, input: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.in_width);
        out.clear();
        for o in 0..self.out_width {
            let row = &self.weights[o * self.in_width..(o + 1) * self.in_width];
            out.push(self.bias[o] + dot(row, input));
        }
    }
}

/// The Q-network parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Network with the given layer widths (input, hidden..., output) and
    /// weights drawn uniformly from +-1/sqrt(fan_in); biases start at zero.
    pub fn new(widths: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(widths.len() >= 2, "need at least input and output widths");
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = 1.0 / (fan_in as f64).sqrt();
                Layer {
                    weights: (0..fan_in * fan_out)
                        .map(|_| rng.random_range(-limit..limit))
                        .collect(),
                    bias: vec![0.0; fan_out],
                    in_width: fan_in,
                    out_width: fan_out,
                }
            })
            .collect();
        Mlp { layers }
    }

    /// The standard trunk: input -> 64 -> 128 -> 64 -> output.
    pub fn with_trunk(input_width: usize, output_width: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut widths = vec![input_width];
        widths.extend_from_slice(&HIDDEN_WIDTHS);
        widths.push(output_width);
        Mlp::new(&widths, rng)
    }

    /// All-zero network with the given widths.
    pub fn zeros(widths: &[usize]) -> Self {
        let layers = widths
            .windows(2)
            .map(|w| Layer {
                weights: vec![0.0; w[0] * w[1]],
                bias: vec![0.0; w[1]],
                in_width: w[0],
                out_width: w[1],
            })
            .collect();
        Mlp { layers }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut widths = vec![self.layers[0].in_width];
        widths.extend(self.layers.iter().map(|l| l.out_width));
        widths
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].in_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().out_width
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Multiply-accumulates of one forward pass: sum of in*out per layer.
    pub fn forward_macs(&self) -> u64 {
        self.layers
            .iter()
            .map(|l| (l.in_width * l.out_width) as u64)
            .sum()
    }

    /// Q-values for one encoded state.
    pub fn forward(&self, input: &[f64], macs: &mut u64) -> Vec<f64> {
        *macs += self.forward_macs();
        let mut current = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            layer.matvec(&current, &mut next);
            if idx != last {
                for v in next.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        current
    }

    /// Forward pass retaining every layer's post-activation output, for
    /// backpropagation.
    fn forward_cached(&self, input: &[f64], macs: &mut u64) -> Vec<Vec<f64>> {
        *macs += self.forward_macs();
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.matvec(activations.last().unwrap(), &mut out);
            if idx != last {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            activations.push(out);
        }
        activations
    }
}

/// Per-parameter gradients, shaped like the network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &g| m.max(g.abs()))
    }
}

/// Accumulate the gradient of one squared-error sample into `grads`.
/// `activations` come from `forward_cached`; only the Q-value at
/// `action` receives upstream gradient `upstream`.
fn backprop_sample(
    net: &Mlp,
    activations: &[Vec<f64>],
    action: usize,
    upstream: f64,
    grads: &mut Gradients,
    macs: &mut u64,
) {
    *macs += 2 * net.forward_macs();
    let num_layers = net.layers.len();
    let mut delta = vec![0.0; net.output_width()];
    delta[action] = upstream;
    for l in (0..num_layers).rev() {
        let layer = &net.layers[l];
        let input = &activations[l];
        let gw = &mut grads.weights[l];
        for o in 0..layer.out_width {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            grads.biases[l][o] += d;
            let row = &mut gw[o * layer.in_width..(o + 1) * layer.in_width];
            for (g, &x) in row.iter_mut().zip(input) {
                *g += d * x;
            }
        }
        if l == 0 {
            break;
        }
        // delta for the previous layer: W^T delta, gated by the rectifier
        let mut prev = vec![0.0; layer.in_width];
        for o in 0..layer.out_width {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            let row = &layer.weights[o * layer.in_width..(o + 1) * layer.in_width];
            for (p, &w) in prev.iter_mut().zip(row) {
                *p += w * d;
            }
        }
        for (p, &a) in prev.iter_mut().zip(&activations[l]) {
            if a <= 0.0 {
                *p = 0.0;
            }
        }
        delta = prev;
    }
}

/// Mean squared temporal-difference loss over a batch and its gradients.
///
/// Per transition: `(r + gamma * max_a' Q_target(s', a') - Q(s, a))^2`,
/// with the bootstrap term dropped on terminal transitions. Gradients flow
/// only through `Q(s, a)`; the target network is detached.
pub fn td_loss(
    net: &Mlp,
    target_net: &Mlp,
    batch: &[&Transition],
    discount: f64,
    macs: &mut u64,
) -> (f64, Gradients) {
    assert!(!batch.is_empty(), "td_loss needs a nonempty batch");
    let mut grads = Gradients::zeros_like(net);
    let inv_n = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for tr in batch {
        let target = if tr.terminal {
            tr.reward
        } else {
            let next_q = target_net.forward(&tr.next_state, macs);
            tr.reward + discount * next_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        };
        let activations = net.forward_cached(&tr.state, macs);
        let q_sa = activations.last().unwrap()[tr.action];
        let err = q_sa - target;
        loss += err * err * inv_n;
        backprop_sample(net, &activations, tr.action, 2.0 * err * inv_n, &mut grads, macs);
    }
    (loss, grads)
}
