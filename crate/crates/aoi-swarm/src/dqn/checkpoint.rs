//! Versioned JSON checkpoints.
//!
//! A learner checkpoint captures everything its training trajectory depends
//! on: network and target-network weights, Adam moments, the replay buffer
//! contents, the sampling RNG, and the step counters. Restoring one and
//! continuing produces bit-identical results to an uninterrupted run.

use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::mlp::Mlp;
use super::replay::ReplayBuffer;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Serializable state of one Q-learner.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnerCheckpoint {
    pub net: Mlp,
    pub target: Mlp,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
    pub rng: ChaCha8Rng,
    pub train_steps: u64,
    pub target_syncs: u64,
}

/// Serializable state of a whole training run: scheme label, episode
/// progress (which determines the epsilon schedule position), and every
/// learner. `version` guards the on-disk format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainerCheckpoint {
    pub version: u32,
    pub scheme: String,
    pub episodes_done: usize,
    pub total_episodes: usize,
    pub epsilon_current: f64,
    pub learners: Vec<LearnerCheckpoint>,
    pub messages: u64,
    pub mac_ops: u64,
    /// Action stream of the random-walk baseline.
    pub rw_rng: ChaCha8Rng,
}

impl TrainerCheckpoint {
    pub fn check_version(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion(self.version, CHECKPOINT_VERSION));
        }
        Ok(())
    }
}

pub fn save_checkpoint<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string(value).expect("checkpoint serializes");
    fs::write(path, json)?;
    Ok(())
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
