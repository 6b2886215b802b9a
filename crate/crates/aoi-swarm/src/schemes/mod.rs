//! The training orchestrators: a centralized joint learner, three
//! multi-agent variants with decreasing information sharing, and a
//! random-walk baseline, all with signaling and computation accounting.
//!
//! Every scheme drives the exact same environment dynamics; they differ
//! only in what the learners observe, who learns, and what control traffic
//! they cost.

mod learner;
mod runner;

use serde::{Deserialize, Serialize};

pub use learner::Learner;
pub use runner::{
    greedy_return, replay_episode, CurvePoint, EpisodeLog, SchemeRunner, TrainOutcome,
};

use crate::dqn::Mlp;

/// How the agents are trained.
///
/// * `Centralized` (C-RL): one learner at the base station over the joint
///   state and action of every UAV.
/// * `Cooperative` (Co-MARL): per-UAV learners; action selection runs
///   serially within a frame and each UAV sees the actions already taken by
///   lower-indexed UAVs, plus the broadcast age vector.
/// * `PartiallyCooperative` (PCo-MARL): per-UAV learners acting
///   simultaneously on the broadcast age vector; actions are shared only
///   with the base station.
/// * `Decentralized` (D-MARL): per-UAV learners with no sharing at all;
///   each acts on a local age belief updated only by its own services.
/// * `RandomWalk` (RW): uniform valid actions, no learning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[serde(alias = "c-rl", alias = "crl")]
    Centralized,
    #[serde(alias = "co-marl", alias = "co")]
    Cooperative,
    #[serde(alias = "pco-marl", alias = "pco")]
    PartiallyCooperative,
    #[serde(alias = "d-marl", alias = "d")]
    Decentralized,
    #[serde(alias = "rw")]
    RandomWalk,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Centralized,
        Scheme::Cooperative,
        Scheme::PartiallyCooperative,
        Scheme::Decentralized,
        Scheme::RandomWalk,
    ];

    /// Short display label.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Centralized => "C-RL",
            Scheme::Cooperative => "Co-MARL",
            Scheme::PartiallyCooperative => "PCo-MARL",
            Scheme::Decentralized => "D-MARL",
            Scheme::RandomWalk => "RW",
        }
    }

    pub fn is_learning(self) -> bool {
        self != Scheme::RandomWalk
    }

    /// Whether one joint learner controls every UAV.
    pub fn is_joint(self) -> bool {
        self == Scheme::Centralized
    }

    /// Control messages per UAV per episode (excluding relayed data).
    ///
    /// Centralized: one policy/action download from the base station.
    /// Decentralized: a position report and a frame-sync beacon.
    /// Partially cooperative: an action upload, the age broadcast, and the
    /// sync beacon. Cooperative: those three plus the peer action relay.
    pub fn messages_per_uav(self) -> u64 {
        match self {
            Scheme::Centralized | Scheme::RandomWalk => 1,
            Scheme::Cooperative => 4,
            Scheme::PartiallyCooperative => 3,
            Scheme::Decentralized => 2,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "centralized" | "c-rl" | "crl" => Ok(Scheme::Centralized),
            "cooperative" | "co-marl" | "co" => Ok(Scheme::Cooperative),
            "partially-cooperative" | "pco-marl" | "pco" => Ok(Scheme::PartiallyCooperative),
            "decentralized" | "d-marl" | "d" => Ok(Scheme::Decentralized),
            "random-walk" | "rw" => Ok(Scheme::RandomWalk),
            other => Err(format!(
                "unknown scheme '{other}' (expected one of: centralized, cooperative, \
                 partially-cooperative, decentralized, random-walk)"
            )),
        }
    }
}

/// Control messages exchanged per episode for a whole swarm.
pub fn count_messages(scheme: Scheme, num_uavs: usize) -> u64 {
    num_uavs as u64 * scheme.messages_per_uav()
}

/// Multiply-accumulate total of `frames` greedy action selections (one
/// forward pass each) through a network. Training passes are tracked by the
/// live counters instead.
pub fn count_macs(net: &Mlp, frames: u64) -> u64 {
    frames * net.forward_macs()
}

/// Running totals for one run. Messages follow the per-scheme rule exactly;
/// MAC ops are incremented live by the forward/backward instrumentation;
/// wall time covers the episode loops only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AccountingCounters {
    pub messages: u64,
    pub mac_ops: u64,
    pub wall_time_s: f64,
}

/// Splitmix-style seed derivation, so every run and learner gets an
/// independent deterministic stream.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
