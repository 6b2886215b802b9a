//! Epsilon-greedy action selection over masked action spaces, the epsilon
//! annealing schedule, and target-network synchronization.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::error::{Error, Result};

/// Linear anneal from `start` to `end` over the first `decay_fraction` of
/// the episode budget, constant afterwards.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.6,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize, total_episodes: usize) -> f64 {
        let horizon = (total_episodes as f64 * self.decay_fraction).max(1.0);
        let progress = (episode as f64 / horizon).min(1.0);
        self.start + (self.end - self.start) * progress
    }
}

/// Greedy action over the valid entries, ties broken by the lowest index.
pub fn greedy_masked(qvals: &[f64], mask: &[bool]) -> Result<usize> {
    debug_assert_eq!(qvals.len(), mask.len());
    let mut best: Option<(usize, f64)> = None;
    for (idx, (&q, &ok)) in qvals.iter().zip(mask).enumerate() {
        if ok && best.map_or(true, |(_, bq)| q > bq) {
            best = Some((idx, q));
        }
    }
    best.map(|(idx, _)| idx).ok_or(Error::NoValidAction)
}

/// Uniform draw over the valid entries.
pub fn uniform_masked(mask: &[bool], rng: &mut ChaCha8Rng) -> Result<usize> {
    let valid = mask.iter().filter(|&&ok| ok).count();
    if valid == 0 {
        return Err(Error::NoValidAction);
    }
    let pick = rng.random_range(0..valid);
    Ok(mask
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .nth(pick)
        .expect("counted valid entries")
        .0)
}

/// With probability epsilon a uniform valid action, otherwise the masked
/// argmax. Always consumes exactly one uniform draw for the branch choice.
pub fn act_epsilon_greedy(
    qvals: &[f64],
    mask: &[bool],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    if rng.random::<f64>() < epsilon {
        uniform_masked(mask, rng)
    } else {
        greedy_masked(qvals, mask)
    }
}

/// Hard copy of the current network into a fresh target network.
pub fn sync_target(net: &Mlp) -> Mlp {
    net.clone()
}
