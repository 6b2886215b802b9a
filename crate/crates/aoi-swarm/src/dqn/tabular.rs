//! Tabular Q-learning over small finite-horizon deterministic MDPs, used as
//! an independent oracle against the neural learner.
//!
//! States are keyed by (frame, state): a finite-horizon optimal policy is
//! time-dependent, so the frame index is part of the table key.

use std::collections::HashMap;
use std::hash::Hash;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::policy::{act_epsilon_greedy, greedy_masked, EpsilonSchedule};
use crate::error::{Error, Result};

/// A deterministic episodic decision process with a finite action set.
pub trait DeterministicMdp {
    type State: Clone + Eq + Hash;

    fn initial_state(&self) -> Self::State;
    fn num_actions(&self) -> usize;

    /// Valid actions in this state; defaults to everything.
    fn action_mask(&self, _state: &Self::State) -> Vec<bool> {
        vec![true; self.num_actions()]
    }

    /// Deterministic transition: successor state and immediate reward.
    fn step(&self, state: &Self::State, action: usize) -> (Self::State, f64);
}

#[derive(Clone, Debug)]
pub struct TabularConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub episodes: usize,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    /// Stop once an episode's largest Q update falls below this.
    pub tolerance: f64,
    /// Refuse instances whose discovered table would exceed this many
    /// state-action pairs.
    pub state_action_cap: usize,
}

impl Default for TabularConfig {
    fn default() -> Self {
        TabularConfig {
            learning_rate: 0.1,
            discount: 0.99,
            episodes: 20_000,
            epsilon: EpsilonSchedule::default(),
            seed: 0,
            tolerance: 0.0,
            state_action_cap: 100_000,
        }
    }
}

/// Dense action-value table keyed by (frame, state).
#[derive(Clone, Debug)]
pub struct QTable<S: Eq + Hash> {
    values: HashMap<(usize, S), Vec<f64>>,
    num_actions: usize,
}

impl<S: Clone + Eq + Hash> QTable<S> {
    fn new(num_actions: usize) -> Self {
        QTable {
            values: HashMap::new(),
            num_actions,
        }
    }

    pub fn num_entries(&self) -> usize {
        self.values.len()
    }

    /// Q-values at (frame, state); zeros when unvisited.
    pub fn q_values(&self, frame: usize, state: &S) -> Vec<f64> {
        self.values
            .get(&(frame, state.clone()))
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.num_actions])
    }

    /// Undiscounted return of the greedy policy, executed from the start.
    pub fn evaluate_greedy<M>(&self, mdp: &M, horizon: usize) -> f64
    where
        M: DeterministicMdp<State = S>,
    {
        let mut state = mdp.initial_state();
        let mut total = 0.0;
        for t in 0..horizon {
            let mask = mdp.action_mask(&state);
            let q = self.q_values(t, &state);
            let action = greedy_masked(&q, &mask).expect("at least one valid action");
            let (next, reward) = mdp.step(&state, action);
            total += reward;
            state = next;
        }
        total
    }
}

/// Iterative Q-learning with epsilon-greedy behavior until the per-episode
/// max-norm update falls below tolerance or the episode budget is spent.
///
/// The bootstrap maximizes over the successor's valid actions, matching the
/// feasible action set the greedy policy draws from.
pub fn tabular_q_learning<M: DeterministicMdp>(
    mdp: &M,
    horizon: usize,
    config: &TabularConfig,
) -> Result<QTable<M::State>> {
    let num_actions = mdp.num_actions();
    let mut table = QTable::new(num_actions);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for episode in 0..config.episodes {
        let epsilon = config.epsilon.at(episode, config.episodes);
        let mut state = mdp.initial_state();
        let mut max_update = 0.0f64;
        for t in 0..horizon {
            let mask = mdp.action_mask(&state);
            if !table.values.contains_key(&(t, state.clone()))
                && (table.values.len() + 1) * num_actions > config.state_action_cap
            {
                return Err(Error::StateCapExceeded(
                    (table.values.len() + 1) * num_actions,
                    config.state_action_cap,
                ));
            }
            let row = table
                .values
                .entry((t, state.clone()))
                .or_insert_with(|| vec![0.0; num_actions]);
            let action = act_epsilon_greedy(row, &mask, epsilon, &mut rng)?;
            let (next, reward) = mdp.step(&state, action);
            let target = if t + 1 == horizon {
                reward
            } else {
                let next_mask = mdp.action_mask(&next);
                let next_row = table.q_values(t + 1, &next);
                let best_next = next_row
                    .iter()
                    .zip(&next_mask)
                    .filter(|(_, &ok)| ok)
                    .map(|(&q, _)| q)
                    .fold(f64::NEG_INFINITY, f64::max);
                reward + config.discount * best_next
            };
            let row = table
                .values
                .get_mut(&(t, state.clone()))
                .expect("row inserted above");
            let update = config.learning_rate * (target - row[action]);
            row[action] += update;
            max_update = max_update.max(update.abs());
            state = next;
        }
        if max_update < config.tolerance {
            break;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two states, two actions: action 0 stays (reward 1 in state 0,
    /// reward 0 in state 1), action 1 swaps states (reward 2 from state 0,
    /// reward 5 from state 1).
    struct Chain;

    impl DeterministicMdp for Chain {
        type State = u8;

        fn initial_state(&self) -> u8 {
            0
        }

        fn num_actions(&self) -> usize {
            2
        }

        fn step(&self, state: &u8, action: usize) -> (u8, f64) {
            match (*state, action) {
                (0, 0) => (0, 1.0),
                (0, 1) => (1, 2.0),
                (1, 0) => (1, 0.0),
                (1, 1) => (0, 5.0),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn converges_to_the_hand_solved_bellman_values_on_a_two_state_chain() {
        // horizon 2, gamma = 1: from state 0 the best plan is swap (2) then
        // swap back (5) for value 7; Q(0, 0) at t=0 is 1 + max(1, 2) = 3.
        let config = TabularConfig {
            learning_rate: 0.5,
            discount: 1.0,
            episodes: 4000,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 1.0,
                decay_fraction: 1.0,
            },
            seed: 3,
            ..TabularConfig::default()
        };
        let table = tabular_q_learning(&Chain, 2, &config).unwrap();
        let q0 = table.q_values(0, &0);
        assert!((q0[1] - 7.0).abs() < 1e-3, "Q(0, swap) = {}", q0[1]);
        assert!((q0[0] - 3.0).abs() < 1e-3, "Q(0, stay) = {}", q0[0]);
        assert!((table.evaluate_greedy(&Chain, 2) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn zero_discount_learns_immediate_rewards() {
        let config = TabularConfig {
            learning_rate: 0.5,
            discount: 0.0,
            episodes: 2000,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 1.0,
                decay_fraction: 1.0,
            },
            seed: 1,
            ..TabularConfig::default()
        };
        let table = tabular_q_learning(&Chain, 3, &config).unwrap();
        for t in 0..3 {
            let q0 = table.q_values(t, &0);
            assert!((q0[0] - 1.0).abs() < 1e-6);
            assert!((q0[1] - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_learning_rate_leaves_the_table_at_zero() {
        let config = TabularConfig {
            learning_rate: 0.0,
            episodes: 100,
            ..TabularConfig::default()
        };
        let table = tabular_q_learning(&Chain, 4, &config).unwrap();
        for t in 0..4 {
            for s in [0u8, 1] {
                assert!(table.q_values(t, &s).iter().all(|&q| q == 0.0));
            }
        }
    }

    #[test]
    fn state_cap_is_enforced() {
        let config = TabularConfig {
            state_action_cap: 3,
            ..TabularConfig::default()
        };
        let err = tabular_q_learning(&Chain, 2, &config).unwrap_err();
        assert!(matches!(err, Error::StateCapExceeded(_, 3)));
    }
}
