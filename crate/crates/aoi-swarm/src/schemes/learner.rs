//! One Q-learner: network, target network, optimizer, replay buffer, and
//! its private RNG stream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dqn::{
    adam_step, greedy_masked, sync_target, uniform_masked, AdamState, LearnerCheckpoint, Mlp,
    ReplayBuffer, TrainConfig,
};
use crate::error::Result;
use crate::mdp::Transition;

pub struct Learner {
    pub net: Mlp,
    pub target: Mlp,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
    pub rng: ChaCha8Rng,
    pub train_steps: u64,
    pub target_syncs: u64,
    /// Transition awaiting its successor observation: (state, action, reward).
    pub pending: Option<(Vec<f64>, usize, f64)>,
}

impl Learner {
    pub fn new(input_width: usize, output_width: usize, config: &TrainConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::with_trunk(input_width, output_width, &mut rng);
        let target = sync_target(&net);
        Learner {
            adam: AdamState::new(&net),
            buffer: ReplayBuffer::new(config.replay_capacity, seed.wrapping_add(1)),
            net,
            target,
            rng,
            train_steps: 0,
            target_syncs: 0,
            pending: None,
        }
    }

    /// Epsilon-greedy selection that skips the forward pass on exploration
    /// draws. Consumes the same RNG stream as feeding precomputed Q-values
    /// to the policy function.
    pub fn select(
        &mut self,
        features: &[f64],
        mask: &[bool],
        epsilon: f64,
        macs: &mut u64,
    ) -> Result<usize> {
        if self.rng.random::<f64>() < epsilon {
            uniform_masked(mask, &mut self.rng)
        } else {
            let qvals = self.net.forward(features, macs);
            greedy_masked(&qvals, mask)
        }
    }

    /// Complete the pending transition with its successor observation and
    /// store it.
    pub fn finish_pending(&mut self, next_state: &[f64], terminal: bool) {
        if let Some((state, action, reward)) = self.pending.take() {
            self.buffer.push(Transition {
                state,
                action,
                reward,
                next_state: next_state.to_vec(),
                terminal,
            });
        }
    }

    /// One gradient step when the buffer can fill a batch; hard-syncs the
    /// target every `target_sync_interval` steps. Returns the batch loss.
    pub fn train_step(&mut self, config: &TrainConfig, macs: &mut u64) -> Option<f64> {
        if self.buffer.len() < config.batch_size {
            return None;
        }
        let indices = self.buffer.sample_indices(config.batch_size);
        let batch: Vec<&Transition> = indices.iter().map(|&i| self.buffer.get(i)).collect();
        let (loss, grads) = crate::dqn::td_loss(
            &self.net,
            &self.target,
            &batch,
            config.discount,
            macs,
        );
        adam_step(&mut self.net, &grads, &mut self.adam, config.learning_rate);
        self.train_steps += 1;
        if self.train_steps % config.target_sync_interval == 0 {
            self.target = sync_target(&self.net);
            self.target_syncs += 1;
        }
        Some(loss)
    }

    pub fn to_checkpoint(&self) -> LearnerCheckpoint {
        LearnerCheckpoint {
            net: self.net.clone(),
            target: self.target.clone(),
            adam: self.adam.clone(),
            buffer: self.buffer.clone(),
            rng: self.rng.clone(),
            train_steps: self.train_steps,
            target_syncs: self.target_syncs,
        }
    }

    pub fn from_checkpoint(checkpoint: LearnerCheckpoint) -> Self {
        Learner {
            net: checkpoint.net,
            target: checkpoint.target,
            adam: checkpoint.adam,
            buffer: checkpoint.buffer,
            rng: checkpoint.rng,
            train_steps: checkpoint.train_steps,
            target_syncs: checkpoint.target_syncs,
            pending: None,
        }
    }
}
