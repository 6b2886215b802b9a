//! Exact finite-horizon dynamic programming over the reachable state set of
//! a deterministic MDP. Independent oracle for the learners.

use std::collections::HashMap;

use super::tabular::DeterministicMdp;
use crate::error::{Error, Result};

/// Optimal value from the initial state plus one optimizing action sequence.
#[derive(Clone, Debug)]
pub struct DpSolution {
    pub value: f64,
    pub plan: Vec<usize>,
}

/// Backward induction over the forward-reachable layers.
///
/// `discount` of 1.0 optimizes the plain accumulated reward; smaller values
/// optimize the discounted return. Refuses instances whose reachable
/// state-action-horizon product exceeds `state_action_cap`.
pub fn finite_horizon_dp<M: DeterministicMdp>(
    mdp: &M,
    horizon: usize,
    discount: f64,
    state_action_cap: usize,
) -> Result<DpSolution> {
    if horizon == 0 {
        return Ok(DpSolution {
            value: 0.0,
            plan: Vec::new(),
        });
    }
    let num_actions = mdp.num_actions();

    // Forward pass: discover the reachable states per frame and cache the
    // deterministic transitions.
    let mut layers: Vec<Vec<M::State>> = vec![vec![mdp.initial_state()]];
    // transitions[t][state][action] = (next_index, reward); None when masked
    let mut transitions: Vec<Vec<Vec<Option<(usize, f64)>>>> = Vec::with_capacity(horizon);
    let mut total_pairs = num_actions;
    for t in 0..horizon {
        let mut next_index: HashMap<M::State, usize> = HashMap::new();
        let mut next_layer: Vec<M::State> = Vec::new();
        let mut layer_transitions = Vec::with_capacity(layers[t].len());
        for state in &layers[t] {
            let mask = mdp.action_mask(state);
            let mut rows = vec![None; num_actions];
            for (action, row) in rows.iter_mut().enumerate() {
                if !mask[action] {
                    continue;
                }
                let (next, reward) = mdp.step(state, action);
                let idx = *next_index.entry(next.clone()).or_insert_with(|| {
                    next_layer.push(next.clone());
                    next_layer.len() - 1
                });
                *row = Some((idx, reward));
            }
            layer_transitions.push(rows);
        }
        total_pairs += next_layer.len() * num_actions;
        if total_pairs > state_action_cap {
            return Err(Error::StateCapExceeded(total_pairs, state_action_cap));
        }
        transitions.push(layer_transitions);
        layers.push(next_layer);
    }

    // Backward pass: V[horizon] = 0 everywhere.
    let mut next_values = vec![0.0; layers[horizon].len()];
    let mut best_actions: Vec<Vec<usize>> = vec![Vec::new(); horizon];
    for t in (0..horizon).rev() {
        let mut values = vec![f64::NEG_INFINITY; layers[t].len()];
        let mut actions = vec![0usize; layers[t].len()];
        for (s, rows) in transitions[t].iter().enumerate() {
            for (action, row) in rows.iter().enumerate() {
                if let Some((next_idx, reward)) = row {
                    let value = reward + discount * next_values[*next_idx];
                    if value > values[s] {
                        values[s] = value;
                        actions[s] = action;
                    }
                }
            }
        }
        best_actions[t] = actions;
        next_values = values;
    }

    // Extract one optimizing plan from the start state.
    let mut plan = Vec::with_capacity(horizon);
    let mut state_idx = 0usize;
    for t in 0..horizon {
        let action = best_actions[t][state_idx];
        plan.push(action);
        state_idx = transitions[t][state_idx][action]
            .expect("optimal action is valid")
            .0;
    }

    Ok(DpSolution {
        value: next_values[0],
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{AgentAction, SwarmEnv};
    use crate::oracle::SingleUavMdp;

    fn brute_force_best<M: DeterministicMdp>(
        mdp: &M,
        horizon: usize,
        discount: f64,
    ) -> f64 {
        fn recurse<M: DeterministicMdp>(
            mdp: &M,
            state: &M::State,
            remaining: usize,
            discount: f64,
        ) -> f64 {
            if remaining == 0 {
                return 0.0;
            }
            let mask = mdp.action_mask(state);
            let mut best = f64::NEG_INFINITY;
            for (action, &ok) in mask.iter().enumerate() {
                if !ok {
                    continue;
                }
                let (next, reward) = mdp.step(state, action);
                let value = reward + discount * recurse(mdp, &next, remaining - 1, discount);
                best = best.max(value);
            }
            best
        }
        recurse(mdp, &mdp.initial_state(), horizon, discount)
    }

    #[test]
    fn zero_horizon_has_zero_value_and_an_empty_plan() {
        let env = SwarmEnv::small(3, 4, 2, 1, 5);
        let solution = finite_horizon_dp(&SingleUavMdp { env: &env }, 0, 1.0, 10_000).unwrap();
        assert_eq!(solution.value, 0.0);
        assert!(solution.plan.is_empty());
    }

    #[test]
    fn single_cell_single_cluster_value_is_horizon_times_reward() {
        let env = SwarmEnv::small(1, 3, 3, 1, 5);
        assert_eq!(env.num_clusters(), 1);
        let mdp = SingleUavMdp { env: &env };
        let (_, reward) = mdp.step(&mdp.initial_state(), AgentAction {
            direction: crate::world::Direction::Hover,
            cluster: 0,
        }.index(1));
        let horizon = 7;
        let solution = finite_horizon_dp(&mdp, horizon, 1.0, 10_000).unwrap();
        assert!((solution.value - horizon as f64 * reward).abs() < 1e-9);
        assert_eq!(solution.plan.len(), horizon);
    }

    #[test]
    fn dp_matches_exhaustive_enumeration_on_a_small_grid() {
        let env = SwarmEnv::small(3, 4, 2, 1, 5);
        assert_eq!(env.num_clusters(), 2);
        let mdp = SingleUavMdp { env: &env };
        let horizon = 6;
        let dp = finite_horizon_dp(&mdp, horizon, 1.0, 1_000_000).unwrap();
        let brute = brute_force_best(&mdp, horizon, 1.0);
        assert!(
            (dp.value - brute).abs() < 1e-9,
            "dp {} vs brute force {}",
            dp.value,
            brute
        );
    }

    #[test]
    fn the_extracted_plan_achieves_the_dp_value() {
        let env = SwarmEnv::small(3, 4, 2, 1, 5);
        let mdp = SingleUavMdp { env: &env };
        let horizon = 8;
        let dp = finite_horizon_dp(&mdp, horizon, 1.0, 1_000_000).unwrap();
        let mut state = mdp.initial_state();
        let mut total = 0.0;
        for &action in &dp.plan {
            let (next, reward) = mdp.step(&state, action);
            total += reward;
            state = next;
        }
        assert!((total - dp.value).abs() < 1e-9);
    }

    #[test]
    fn cap_refuses_oversized_instances() {
        let env = SwarmEnv::small(3, 4, 2, 1, 5);
        let err = finite_horizon_dp(&SingleUavMdp { env: &env }, 6, 1.0, 50).unwrap_err();
        assert!(matches!(err, Error::StateCapExceeded(_, 50)));
    }
}
