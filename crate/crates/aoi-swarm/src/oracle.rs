//! Small-instance oracles: a single-UAV environment viewed as a discrete
//! MDP, exact dynamic programming over it, and tabular Q-learning, used to
//! validate the neural learner end to end.

use crate::dqn::{
    finite_horizon_dp, tabular_q_learning, DeterministicMdp, DpSolution, EpsilonSchedule,
    TabularConfig, TrainConfig,
};
use crate::error::Result;
use crate::mdp::{valid_action_mask, AgeObservation, AgentAction, AgentState, SwarmEnv};
use crate::schemes::{greedy_return, Scheme, SchemeRunner};
use crate::world::Cell;

/// A single-UAV [`SwarmEnv`] exposed as a deterministic discrete MDP whose
/// state is the UAV cell plus the full age vector.
pub struct SingleUavMdp<'a> {
    pub env: &'a SwarmEnv,
}

impl SingleUavMdp<'_> {
    fn num_clusters(&self) -> usize {
        self.env.num_clusters()
    }
}

impl DeterministicMdp for SingleUavMdp<'_> {
    type State = (Cell, Vec<u32>);

    fn initial_state(&self) -> Self::State {
        (
            self.env.start_positions()[0],
            self.env.initial_aoi().ages().to_vec(),
        )
    }

    fn num_actions(&self) -> usize {
        5 * self.num_clusters()
    }

    fn action_mask(&self, state: &Self::State) -> Vec<bool> {
        let agent = AgentState {
            uav_cells: vec![state.0],
            ages: state.1.clone(),
            peer_actions: vec![],
        };
        valid_action_mask(&agent, &self.env.world, self.num_clusters())
    }

    fn step(&self, state: &Self::State, action: usize) -> (Self::State, f64) {
        let aoi = crate::aoi::AoiState::from_ages(state.1.clone(), self.env.max_age);
        let outcome = self.env.env_step(
            0,
            &[state.0],
            &[AgentAction::from_index(action, self.num_clusters())],
            &aoi,
        );
        (
            (outcome.positions[0], outcome.aoi.ages().to_vec()),
            outcome.rewards[0],
        )
    }
}

/// The standard oracle instance: 3x3 grid, 4 devices in 2 clusters, one UAV,
/// 10-frame episodes.
pub fn oracle_env() -> SwarmEnv {
    let mut env = SwarmEnv::small(3, 4, 2, 1, 5);
    env.frames_per_episode = 10;
    env
}

/// Result of the independent-oracle comparison on the standard instance.
#[derive(Clone, Debug)]
pub struct OracleReport {
    /// Optimal undiscounted return (exact dynamic programming).
    pub dp_value: f64,
    /// Undiscounted return of the converged tabular greedy policy.
    pub tabular_return: f64,
    /// |tabular - dp| / |dp|.
    pub tabular_gap: f64,
}

/// Solve the standard instance exactly and with tabular Q-learning.
pub fn run_dp_tabular_suite(env: &SwarmEnv, discount: f64) -> Result<(DpSolution, OracleReport)> {
    let mdp = SingleUavMdp { env };
    let horizon = env.frames_per_episode;
    let dp = finite_horizon_dp(&mdp, horizon, 1.0, 2_000_000)?;
    let config = TabularConfig {
        learning_rate: 0.5,
        discount,
        episodes: 30_000,
        epsilon: EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.6,
        },
        seed: 11,
        tolerance: 0.0,
        state_action_cap: 2_000_000,
    };
    let table = tabular_q_learning(&mdp, horizon, &config)?;
    let tabular_return = table.evaluate_greedy(&mdp, horizon);
    let report = OracleReport {
        dp_value: dp.value,
        tabular_return,
        tabular_gap: (tabular_return - dp.value).abs() / dp.value.abs(),
    };
    Ok((dp, report))
}

/// Outcome of training the neural learner on the oracle instance.
#[derive(Clone, Debug)]
pub struct DqnOracleOutcome {
    pub greedy_return: f64,
    /// |greedy - optimal| / |optimal|.
    pub gap: f64,
}

/// Hyperparameters used for the neural learner on the oracle instance.
pub fn oracle_train_config(discount: f64) -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-3,
        discount,
        episodes: 2500,
        batch_size: 32,
        replay_capacity: 20_000,
        target_sync_interval: 200,
        epsilon: EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.6,
        },
        seed: 7,
        train_period_frames: 1,
        age_observation: AgeObservation::ClusterMax,
        joint_space_cap: 1_000_000,
    }
}

/// Train the from-scratch DQN on the single-UAV oracle instance and compare
/// its greedy return to the exact optimum.
pub fn run_dqn_oracle(env: &SwarmEnv, dp_value: f64) -> Result<DqnOracleOutcome> {
    let mut runner = SchemeRunner::new(
        Scheme::PartiallyCooperative,
        env.clone(),
        oracle_train_config(0.99),
    )?;
    runner.train(0.1, false)?;
    let ret = greedy_return(&mut runner)?;
    Ok(DqnOracleOutcome {
        greedy_return: ret,
        gap: (ret - dp_value).abs() / dp_value.abs(),
    })
}
