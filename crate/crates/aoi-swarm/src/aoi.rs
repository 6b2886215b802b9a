//! Age-of-information state, the per-frame age update, and the step reward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-device ages, clamped to `[1, max_age]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AoiState {
    ages: Vec<u32>,
    max_age: u32,
}

impl AoiState {
    /// Fresh state with every age at 1.
    pub fn new(num_devices: usize, max_age: u32) -> Self {
        assert!(max_age >= 1);
        AoiState {
            ages: vec![1; num_devices],
            max_age,
        }
    }

    /// Pessimistic start: every age saturated at `max_age`.
    pub fn new_saturated(num_devices: usize, max_age: u32) -> Self {
        AoiState {
            ages: vec![max_age; num_devices],
            max_age,
        }
    }

    /// State with explicit ages; each must lie in `[1, max_age]`.
    pub fn from_ages(ages: Vec<u32>, max_age: u32) -> Self {
        assert!(ages.iter().all(|&a| (1..=max_age).contains(&a)));
        AoiState { ages, max_age }
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn max_age(&self) -> u32 {
        self.max_age
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    /// Advance one frame: served devices reset to age 1, everyone else ages
    /// by one up to the saturation threshold. `served` holds device ids.
    pub fn update(&self, served: &[usize]) -> AoiState {
        let mut next = AoiState {
            ages: self
                .ages
                .iter()
                .map(|&a| (a + 1).min(self.max_age))
                .collect(),
            max_age: self.max_age,
        };
        for &d in served {
            next.ages[d] = 1;
        }
        next
    }
}

/// Objective weights and the transmit-power penalty.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Per-device importance weights; strictly positive.
    pub weights: Vec<f64>,
    /// Power penalty factor applied per unit of cluster capacity.
    pub power_penalty: f64,
}

impl RewardConfig {
    /// Uniform weights 1/D with the given penalty.
    pub fn uniform(num_devices: usize, power_penalty: f64) -> Self {
        RewardConfig {
            weights: vec![1.0 / num_devices as f64; num_devices],
            power_penalty,
        }
    }
}

/// Weighted network age: sum of weight_d * age_d.
pub fn weighted_age(state: &AoiState, weights: &[f64]) -> Result<f64> {
    if weights.len() != state.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} device ages",
            weights.len(),
            state.len()
        )));
    }
    Ok(state
        .ages()
        .iter()
        .zip(weights)
        .map(|(&age, &w)| w * age as f64)
        .sum())
}

/// Immediate per-UAV reward for one frame: the negated weighted age of the
/// whole network plus a power penalty over the devices this UAV served,
/// normalized by the cluster capacity. Uses the post-update age state.
pub fn step_reward(
    state: &AoiState,
    served_powers: &[f64],
    config: &RewardConfig,
    cluster_size: usize,
) -> f64 {
    assert!(cluster_size >= 1);
    let age_term = weighted_age(state, &config.weights).expect("weight vector matches device count");
    let power_term: f64 = served_powers.iter().sum();
    -age_term - config.power_penalty / cluster_size as f64 * power_term
}
