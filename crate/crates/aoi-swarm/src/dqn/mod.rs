//! From-scratch value learner: MLP Q-network with hand-written
//! backpropagation, replay buffer, target network, Adam, epsilon-greedy
//! action selection, and two independent oracles (tabular Q-learning and
//! exact finite-horizon dynamic programming) for small instances.

mod adam;
mod checkpoint;
mod dp;
mod mlp;
mod policy;
mod replay;
mod tabular;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState};
pub use checkpoint::{
    load_checkpoint, save_checkpoint, LearnerCheckpoint, TrainerCheckpoint, CHECKPOINT_VERSION,
};
pub use dp::{finite_horizon_dp, DpSolution};
pub use mlp::{td_loss, Gradients, Mlp, HIDDEN_WIDTHS};
pub use policy::{act_epsilon_greedy, greedy_masked, sync_target, uniform_masked, EpsilonSchedule};
pub use replay::ReplayBuffer;
pub use tabular::{tabular_q_learning, DeterministicMdp, QTable, TabularConfig};

use crate::mdp::AgeObservation;

/// Hyperparameters of one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub episodes: usize,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Hard target-network sync every this many gradient steps.
    pub target_sync_interval: u64,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    /// One gradient step per learner every this many frames.
    pub train_period_frames: usize,
    pub age_observation: AgeObservation,
    /// Refuse joint action spaces larger than this.
    pub joint_space_cap: u128,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            discount: 0.99,
            episodes: 100_000,
            batch_size: 64,
            replay_capacity: 50_000,
            target_sync_interval: 500,
            epsilon: EpsilonSchedule::default(),
            seed: 1,
            train_period_frames: 1,
            age_observation: AgeObservation::ClusterMax,
            joint_space_cap: 1_000_000,
        }
    }
}
