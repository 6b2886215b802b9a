//! Fixed-capacity ring buffer with seeded uniform sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mdp::Transition;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity >= 1);
        ReplayBuffer {
            capacity,
            items: Vec::new(),
            cursor: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Store a transition, overwriting the oldest once full.
    pub fn push(&mut self, transition: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(transition);
        } else {
            self.items[self.cursor] = transition;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform sample (with replacement) of `batch_size` stored indices.
    pub fn sample_indices(&mut self, batch_size: usize) -> Vec<usize> {
        assert!(
            self.items.len() >= batch_size,
            "buffer holds {} transitions, batch needs {}",
            self.items.len(),
            batch_size
        );
        (0..batch_size)
            .map(|_| self.rng.random_range(0..self.items.len()))
            .collect()
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.items[index]
    }
}
