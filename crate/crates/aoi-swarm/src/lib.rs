//! Discrete-time simulator of a UAV swarm collecting age-sensitive updates
//! from clustered IoT devices on a grid world, together with a from-scratch
//! deep-Q-learning stack and five control schemes: a centralized joint
//! learner, three multi-agent variants with decreasing information sharing,
//! and a random-walk baseline.
//!
//! The crate is organized around the frame cycle: UAVs move one cell
//! ([`world`]), poll one device cluster each over a line-of-sight uplink
//! ([`channel`]), relay to the base station, and the network ages
//! ([`aoi`]). The [`mdp`] module turns that cycle into a deterministic
//! environment step; [`dqn`] provides the learner and two independent
//! oracles; [`schemes`] orchestrates training; [`config`] and [`matrix`]
//! run experiment sweeps with deterministic seeding.
//!
//! A narrative guide with runnable examples lives in `book/`; its code
//! blocks compile as doc-tests.

pub mod aoi;
pub mod channel;
pub mod config;
pub mod dqn;
pub mod error;
pub mod matrix;
pub mod mdp;
pub mod oracle;
pub mod schemes;
pub mod world;

pub use error::{Error, Result};
