//! State/action encoding, action masking, and the per-frame environment
//! transition covering the full UAV cycle (navigate, transmit, relay, age
//! update).
//!
//! The environment itself is deterministic: identical inputs produce
//! identical outputs. All randomness lives in policies and initialization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aoi::{step_reward, weighted_age, AoiState, RewardConfig};
use crate::channel::{gain_bs, gain_device, tx_power, CycleTiming, LinkBudget, RateConfig};
use crate::error::{Error, Result};
use crate::world::{Cell, Cluster, Device, Direction, GridWorld, UavConfig};

/// One UAV's per-frame decision: where to move and which cluster to poll.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAction {
    pub direction: Direction,
    pub cluster: usize,
}

impl AgentAction {
    /// Flat index in the per-agent action space: direction-major, cluster-minor.
    pub fn index(self, num_clusters: usize) -> usize {
        self.direction.index() * num_clusters + self.cluster
    }

    pub fn from_index(idx: usize, num_clusters: usize) -> AgentAction {
        AgentAction {
            direction: Direction::from_index(idx / num_clusters),
            cluster: idx % num_clusters,
        }
    }
}

/// Decode a joint action index into per-agent actions (agent 0 is the most
/// significant digit).
pub fn joint_action_from_index(
    mut idx: usize,
    num_clusters: usize,
    num_agents: usize,
) -> Vec<AgentAction> {
    let base = 5 * num_clusters;
    let mut actions = vec![
        AgentAction {
            direction: Direction::Hover,
            cluster: 0
        };
        num_agents
    ];
    for slot in (0..num_agents).rev() {
        actions[slot] = AgentAction::from_index(idx % base, num_clusters);
        idx /= base;
    }
    actions
}

/// Flat index of a joint action, inverse of [`joint_action_from_index`].
pub fn joint_action_index(actions: &[AgentAction], num_clusters: usize) -> usize {
    let base = 5 * num_clusters;
    actions
        .iter()
        .fold(0usize, |acc, a| acc * base + a.index(num_clusters))
}

/// Size of the action space: (5 * C)^k, where k is 1 for per-agent learners
/// and the UAV count for the joint learner.
pub fn action_space_size(num_clusters: usize, num_agents_joint: usize) -> u128 {
    (5u128 * num_clusters as u128).pow(num_agents_joint as u32)
}

/// Like [`action_space_size`] but refuses sizes above `cap`, which marks the
/// point where a joint learner stops being trainable.
pub fn guarded_action_space_size(
    num_clusters: usize,
    num_agents_joint: usize,
    cap: u128,
) -> Result<usize> {
    let size = action_space_size(num_clusters, num_agents_joint);
    if size > cap {
        return Err(Error::JointSpaceTooLarge {
            size,
            uavs: num_agents_joint,
            clusters: num_clusters,
            cap,
        });
    }
    Ok(size as usize)
}

/// What a learner observes before acting.
///
/// `uav_cells` holds one cell for a per-agent learner and every UAV's cell
/// for the joint learner. `ages` is the observed per-device age vector --
/// the true ages or a local belief, depending on the training scheme.
/// `peer_actions` carries the action indices already taken this frame by
/// lower-indexed UAVs (cooperative scheme only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub uav_cells: Vec<Cell>,
    pub ages: Vec<u32>,
    pub peer_actions: Vec<usize>,
}

/// Whether the encoder summarizes ages per cluster or passes the raw
/// per-device vector through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgeObservation {
    /// One entry per cluster: the maximum age over its members. The action
    /// space is cluster-level, so this is the small sufficient summary.
    ClusterMax,
    /// One entry per device.
    PerDevice,
}

/// Turns an [`AgentState`] into a feature vector with every entry in [0, 1].
///
/// Layout: normalized (x, y) per observed UAV cell, then normalized ages,
/// then one one-hot block per expected peer action.
#[derive(Clone, Debug)]
pub struct StateEncoder {
    extent: (f64, f64),
    cell_size: f64,
    max_age: u32,
    cluster_members: Vec<Vec<usize>>,
    mode: AgeObservation,
    num_positions: usize,
    num_peer_blocks: usize,
    actions_per_agent: usize,
}

impl StateEncoder {
    pub fn new(
        world: &GridWorld,
        clusters: &[Cluster],
        mode: AgeObservation,
        num_positions: usize,
        num_peer_blocks: usize,
    ) -> Self {
        StateEncoder {
            extent: world.extent(),
            cell_size: world.cell_size(),
            max_age: 0, // set via with_max_age
            cluster_members: clusters.iter().map(|c| c.member_ids.clone()).collect(),
            mode,
            num_positions,
            num_peer_blocks,
            actions_per_agent: 5 * clusters.len(),
        }
    }

    pub fn with_max_age(mut self, max_age: u32) -> Self {
        self.max_age = max_age;
        self
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_members.len()
    }

    fn age_width(&self) -> usize {
        match self.mode {
            AgeObservation::ClusterMax => self.cluster_members.len(),
            AgeObservation::PerDevice => {
                self.cluster_members.iter().map(|m| m.len()).sum()
            }
        }
    }

    /// Width of the encoded feature vector.
    pub fn input_width(&self) -> usize {
        2 * self.num_positions + self.age_width() + self.num_peer_blocks * self.actions_per_agent
    }

    /// Encode an observation. Every entry lands in [0, 1].
    pub fn encode(&self, state: &AgentState) -> Vec<f64> {
        debug_assert_eq!(state.uav_cells.len(), self.num_positions);
        debug_assert!(state.peer_actions.len() <= self.num_peer_blocks);
        let mut features = Vec::with_capacity(self.input_width());
        for &cell in &state.uav_cells {
            features.push((cell.x as f64 + 0.5) * self.cell_size / self.extent.0);
            features.push((cell.y as f64 + 0.5) * self.cell_size / self.extent.1);
        }
        match self.mode {
            AgeObservation::ClusterMax => {
                for members in &self.cluster_members {
                    let max = members
                        .iter()
                        .map(|&d| state.ages[d])
                        .max()
                        .unwrap_or(1);
                    features.push(max as f64 / self.max_age as f64);
                }
            }
            AgeObservation::PerDevice => {
                for &age in &state.ages {
                    features.push(age as f64 / self.max_age as f64);
                }
            }
        }
        let block_start = features.len();
        features.resize(self.input_width(), 0.0);
        for (slot, &action_idx) in state.peer_actions.iter().enumerate() {
            features[block_start + slot * self.actions_per_agent + action_idx] = 1.0;
        }
        features
    }
}

/// Mask over the action space implied by the observation: an action is valid
/// exactly when every movement component stays on valid cells. Cluster
/// choices never mask.
pub fn valid_action_mask(state: &AgentState, world: &GridWorld, num_clusters: usize) -> Vec<bool> {
    let base = 5 * num_clusters;
    match state.uav_cells.len() {
        1 => {
            let dir_ok: Vec<bool> = Direction::ALL
                .iter()
                .map(|&d| world.move_is_valid(state.uav_cells[0], d))
                .collect();
            (0..base).map(|a| dir_ok[a / num_clusters]).collect()
        }
        num_agents => {
            let dir_ok: Vec<[bool; 5]> = state
                .uav_cells
                .iter()
                .map(|&cell| {
                    let mut ok = [false; 5];
                    for (i, &d) in Direction::ALL.iter().enumerate() {
                        ok[i] = world.move_is_valid(cell, d);
                    }
                    ok
                })
                .collect();
            let size = base.pow(num_agents as u32);
            (0..size)
                .map(|joint| {
                    let mut idx = joint;
                    for slot in (0..num_agents).rev() {
                        let a = idx % base;
                        idx /= base;
                        if !dir_ok[slot][a / num_clusters] {
                            return false;
                        }
                    }
                    true
                })
                .collect()
        }
    }
}

/// Everything produced by one frame of the environment.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub positions: Vec<Cell>,
    pub aoi: AoiState,
    /// Per-UAV rewards: identical network age term plus each UAV's own
    /// power term.
    pub rewards: Vec<f64>,
    /// Per-device transmit powers this frame (zero when unserved).
    pub powers: Vec<f64>,
    pub record: FrameRecord,
}

/// Per-frame log record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub uav_cells: Vec<Cell>,
    /// Flat per-agent action indices, sufficient to replay the episode.
    pub action_indices: Vec<usize>,
    pub chosen_clusters: Vec<usize>,
    pub served: Vec<bool>,
    pub ages: Vec<u32>,
    pub rewards: Vec<f64>,
    pub weighted_age: f64,
    pub total_power: f64,
    /// UAV-to-base-station gains at the destination cells; logged for
    /// completeness, relaying is assumed error-free.
    pub bs_gains: Vec<f64>,
}

/// The assembled simulation environment: world geometry, device layout,
/// clustering, link budget, and reward settings for one configuration point.
#[derive(Clone, Debug)]
pub struct SwarmEnv {
    pub world: GridWorld,
    pub devices: Vec<Device>,
    pub clusters: Vec<Cluster>,
    pub budget: LinkBudget,
    pub rate: RateConfig,
    pub timing: CycleTiming,
    pub uav: UavConfig,
    pub reward: RewardConfig,
    /// Per-frame device bound implied by the rate (the reward normalizer).
    pub capacity: usize,
    pub max_age: u32,
    pub frames_per_episode: usize,
}

impl SwarmEnv {
    /// Small square-grid environment with every physical constant at its
    /// default, sized by a forced per-cluster capacity. The transmission
    /// rate is back-computed so the capacity is consistent with it.
    /// Handy for experiments, oracles, and examples.
    pub fn small(
        grid: u32,
        num_devices: usize,
        capacity: usize,
        num_uavs: usize,
        placement_seed: u64,
    ) -> SwarmEnv {
        use crate::world::{cluster_devices, place_devices, WorldConfig};
        let config = WorldConfig {
            grid_cells_x: grid,
            grid_cells_y: grid,
            rng_seed: placement_seed,
            ..WorldConfig::default()
        };
        let world = GridWorld::new(&config).expect("default world config is valid");
        let mut devices = place_devices(&world, num_devices, placement_seed);
        let clusters = cluster_devices(&mut devices, capacity);
        let budget = LinkBudget::default();
        let velocity = 25.0;
        let rate = RateConfig {
            tx_rate: capacity as f64 * budget.packet_size * velocity / world.cell_size(),
            duplex: crate::channel::Duplex::Full,
        };
        SwarmEnv {
            timing: CycleTiming::new(world.cell_size(), velocity, rate.duplex),
            reward: RewardConfig::uniform(num_devices, 5.0),
            uav: UavConfig {
                count: num_uavs,
                height: 100.0,
                velocity,
                duplex: rate.duplex,
                start_cells: Vec::new(),
            },
            world,
            devices,
            clusters,
            budget,
            rate,
            capacity,
            max_age: 30,
            frames_per_episode: 60,
        }
    }

    pub fn num_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn num_uavs(&self) -> usize {
        self.uav.count
    }

    /// Starting cells: configured, or everyone on the base station cell.
    pub fn start_positions(&self) -> Vec<Cell> {
        if self.uav.start_cells.is_empty() {
            vec![self.world.bs_cell(); self.uav.count]
        } else {
            self.uav.start_cells.clone()
        }
    }

    pub fn initial_aoi(&self) -> AoiState {
        AoiState::new(self.num_devices(), self.max_age)
    }

    /// Advance one frame.
    ///
    /// Movement applies first (invalid moves degrade to hover); each chosen
    /// cluster is served once even if several UAVs pick it (the lowest index
    /// serves); served devices' powers follow the destination-cell distance;
    /// ages update; every UAV is rewarded with the shared network age term
    /// plus its own power term.
    pub fn env_step(
        &self,
        frame: usize,
        positions: &[Cell],
        actions: &[AgentAction],
        aoi: &AoiState,
    ) -> StepOutcome {
        assert_eq!(actions.len(), self.uav.count, "one action per UAV");
        assert_eq!(positions.len(), self.uav.count);

        let new_positions: Vec<Cell> = positions
            .iter()
            .zip(actions)
            .map(|(&p, a)| self.world.apply_move(p, a.direction))
            .collect();

        // Lowest-indexed UAV serves a cluster chosen by several UAVs.
        let mut server_of: BTreeMap<usize, usize> = BTreeMap::new();
        for (u, action) in actions.iter().enumerate() {
            server_of.entry(action.cluster).or_insert(u);
        }

        let mut powers = vec![0.0; self.num_devices()];
        let mut served_ids = Vec::new();
        let mut per_uav_power: Vec<Vec<f64>> = vec![Vec::new(); self.uav.count];
        for (&cluster_id, &u) in &server_of {
            let uav_pos = self.world.cell_center(new_positions[u]);
            for &d in &self.clusters[cluster_id].member_ids {
                let dist = uav_pos.distance(self.devices[d].position);
                let gain = gain_device(self.uav.height, dist, &self.budget);
                let power = tx_power(gain, &self.budget);
                powers[d] = power;
                per_uav_power[u].push(power);
                served_ids.push(d);
            }
        }

        let new_aoi = aoi.update(&served_ids);
        let rewards: Vec<f64> = per_uav_power
            .iter()
            .map(|own| step_reward(&new_aoi, own, &self.reward, self.capacity))
            .collect();

        let bs_pos = self.world.bs_position();
        let bs_gains: Vec<f64> = new_positions
            .iter()
            .map(|&p| {
                gain_bs(
                    self.uav.height,
                    self.world.cell_center(p).distance(bs_pos),
                    self.world.bs_height(),
                    &self.budget,
                )
            })
            .collect();

        let mut served = vec![false; self.num_devices()];
        for &d in &served_ids {
            served[d] = true;
        }
        let total_power: f64 = powers.iter().sum();
        let age = weighted_age(&new_aoi, &self.reward.weights)
            .expect("reward weights match the device count");

        StepOutcome {
            record: FrameRecord {
                frame,
                uav_cells: new_positions.clone(),
                action_indices: actions
                    .iter()
                    .map(|a| a.index(self.clusters.len()))
                    .collect(),
                chosen_clusters: actions.iter().map(|a| a.cluster).collect(),
                served,
                ages: new_aoi.ages().to_vec(),
                rewards: rewards.clone(),
                weighted_age: age,
                total_power,
                bs_gains,
            },
            positions: new_positions,
            aoi: new_aoi,
            rewards,
            powers,
        }
    }

    /// Reward the joint (centralized) learner sees: the shared age term plus
    /// the power terms of every UAV. Coincides with the per-UAV reward when
    /// there is a single UAV.
    pub fn joint_reward(&self, record: &FrameRecord) -> f64 {
        -record.weighted_age
            - self.reward.power_penalty / self.capacity as f64 * record.total_power
    }
}

/// Transition as stored in a replay buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::WorldConfig;
    use proptest::prelude::*;

    fn tiny_env(grid: u32, num_devices: usize, capacity: usize, num_uavs: usize) -> SwarmEnv {
        SwarmEnv::small(grid, num_devices, capacity, num_uavs, 5)
    }

    #[test]
    fn action_index_round_trips() {
        for idx in 0..5 * 7 {
            assert_eq!(AgentAction::from_index(idx, 7).index(7), idx);
        }
    }

    #[test]
    fn joint_action_index_round_trips() {
        let num_clusters = 3;
        for idx in [0usize, 1, 14, 102, 15 * 15 - 1] {
            let actions = joint_action_from_index(idx, num_clusters, 2);
            assert_eq!(joint_action_index(&actions, num_clusters), idx);
        }
    }

    #[test]
    fn action_space_sizes() {
        assert_eq!(action_space_size(12, 1), 60);
        assert_eq!(action_space_size(12, 3), 216_000);
        assert_eq!(action_space_size(1, 1), 5);
    }

    #[test]
    fn joint_space_above_the_cap_is_refused() {
        let err = guarded_action_space_size(12, 4, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::JointSpaceTooLarge { .. }));
        assert!(err.to_string().contains("dimensionality"));
        assert!(guarded_action_space_size(12, 3, 1_000_000).is_ok());
    }

    #[test]
    fn encoding_centers_the_bs_cell() {
        let env = tiny_env(11, 8, 4, 1);
        let encoder = StateEncoder::new(
            &env.world,
            &env.clusters,
            AgeObservation::ClusterMax,
            1,
            0,
        )
        .with_max_age(env.max_age);
        let state = AgentState {
            uav_cells: vec![env.world.bs_cell()],
            ages: vec![1; 8],
            peer_actions: vec![],
        };
        let features = encoder.encode(&state);
        assert_eq!(features.len(), 2 + env.num_clusters());
        assert!((features[0] - 0.5).abs() < 1e-12);
        assert!((features[1] - 0.5).abs() < 1e-12);
        for &f in &features[2..] {
            assert!((f - 1.0 / 30.0).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_ages_encode_to_one() {
        let env = tiny_env(11, 8, 4, 1);
        let encoder = StateEncoder::new(
            &env.world,
            &env.clusters,
            AgeObservation::PerDevice,
            1,
            0,
        )
        .with_max_age(env.max_age);
        let state = AgentState {
            uav_cells: vec![Cell::new(0, 0)],
            ages: vec![30; 8],
            peer_actions: vec![],
        };
        let features = encoder.encode(&state);
        assert!(features[2..].iter().all(|&f| f == 1.0));
    }

    #[test]
    fn encoding_is_local_to_the_changed_cell() {
        let env = tiny_env(11, 8, 4, 1);
        let encoder = StateEncoder::new(
            &env.world,
            &env.clusters,
            AgeObservation::ClusterMax,
            1,
            0,
        )
        .with_max_age(env.max_age);
        let ages = vec![3; 8];
        let a = encoder.encode(&AgentState {
            uav_cells: vec![Cell::new(2, 7)],
            ages: ages.clone(),
            peer_actions: vec![],
        });
        let b = encoder.encode(&AgentState {
            uav_cells: vec![Cell::new(3, 4)],
            ages,
            peer_actions: vec![],
        });
        assert_ne!(a[0], b[0]);
        assert_ne!(a[1], b[1]);
        assert_eq!(a[2..], b[2..]);
    }

    #[test]
    fn corner_cell_has_three_valid_directions() {
        let env = tiny_env(11, 8, 4, 1);
        let state = AgentState {
            uav_cells: vec![Cell::new(0, 0)],
            ages: vec![1; 8],
            peer_actions: vec![],
        };
        let mask = valid_action_mask(&state, &env.world, env.num_clusters());
        assert_eq!(mask.len(), 5 * env.num_clusters());
        let valid_dirs = Direction::ALL
            .iter()
            .filter(|&&d| mask[d.index() * env.num_clusters()])
            .count();
        assert_eq!(valid_dirs, 3);
        assert!(mask[Direction::Hover.index() * env.num_clusters()]);
        assert!(mask[Direction::North.index() * env.num_clusters()]);
        assert!(mask[Direction::East.index() * env.num_clusters()]);
    }

    #[test]
    fn interior_cell_has_all_directions_valid() {
        let env = tiny_env(11, 8, 4, 1);
        let state = AgentState {
            uav_cells: vec![Cell::new(5, 5)],
            ages: vec![1; 8],
            peer_actions: vec![],
        };
        let mask = valid_action_mask(&state, &env.world, env.num_clusters());
        assert!(mask.iter().all(|&m| m));
    }

    #[test]
    fn enclosed_cell_can_only_hover() {
        let config = WorldConfig {
            grid_cells_x: 5,
            grid_cells_y: 5,
            restricted_cells: vec![
                Cell::new(1, 2),
                Cell::new(3, 2),
                Cell::new(2, 1),
                Cell::new(2, 3),
            ],
            ..WorldConfig::default()
        };
        let world = GridWorld::new(&config).unwrap();
        let state = AgentState {
            uav_cells: vec![Cell::new(2, 2)],
            ages: vec![1; 4],
            peer_actions: vec![],
        };
        let mask = valid_action_mask(&state, &world, 2);
        for dir in Direction::ALL {
            for cluster in 0..2 {
                let valid = mask[AgentAction { direction: dir, cluster }.index(2)];
                assert_eq!(valid, dir == Direction::Hover);
            }
        }
    }

    #[test]
    fn serving_the_only_cluster_resets_every_age() {
        let env = tiny_env(3, 6, 6, 1);
        assert_eq!(env.num_clusters(), 1);
        let outcome = env.env_step(
            0,
            &env.start_positions(),
            &[AgentAction {
                direction: Direction::Hover,
                cluster: 0,
            }],
            &env.initial_aoi(),
        );
        assert!(outcome.aoi.ages().iter().all(|&a| a == 1));
    }

    #[test]
    fn duplicate_cluster_choices_serve_once() {
        let env = tiny_env(5, 8, 4, 2);
        let aoi = env.initial_aoi();
        let positions = env.start_positions();
        let both = env.env_step(
            0,
            &positions,
            &[
                AgentAction { direction: Direction::Hover, cluster: 1 },
                AgentAction { direction: Direction::Hover, cluster: 1 },
            ],
            &aoi,
        );
        let single_env = tiny_env(5, 8, 4, 1);
        let single = single_env.env_step(
            0,
            &single_env.start_positions(),
            &[AgentAction { direction: Direction::Hover, cluster: 1 }],
            &aoi,
        );
        assert_eq!(both.aoi, single.aoi);
        for (d, device) in env.devices.iter().enumerate() {
            if device.cluster_id != 1 {
                assert_eq!(both.aoi.ages()[d], 2);
            } else {
                assert_eq!(both.aoi.ages()[d], 1);
            }
        }
        // the second UAV pays no power for the duplicated choice
        assert_eq!(both.record.rewards.len(), 2);
        assert!(both.record.rewards[1] >= both.record.rewards[0]);
    }

    #[test]
    fn blocked_moves_still_serve_the_chosen_cluster() {
        let config = WorldConfig {
            grid_cells_x: 5,
            grid_cells_y: 5,
            restricted_cells: vec![Cell::new(2, 3)],
            ..WorldConfig::default()
        };
        let world = GridWorld::new(&config).unwrap();
        let mut env = tiny_env(5, 8, 4, 1);
        env.world = world;
        let positions = vec![Cell::new(2, 2)];
        let outcome = env.env_step(
            0,
            &positions,
            &[AgentAction { direction: Direction::North, cluster: 0 }],
            &env.initial_aoi(),
        );
        assert_eq!(outcome.positions[0], Cell::new(2, 2));
        for &d in &env.clusters[0].member_ids {
            assert_eq!(outcome.aoi.ages()[d], 1);
        }
    }

    #[test]
    fn env_step_is_deterministic() {
        let env = tiny_env(7, 12, 4, 2);
        let aoi = env.initial_aoi().update(&[3, 5]);
        let positions = vec![Cell::new(1, 1), Cell::new(5, 5)];
        let actions = [
            AgentAction { direction: Direction::East, cluster: 0 },
            AgentAction { direction: Direction::North, cluster: 2 },
        ];
        let a = env.env_step(4, &positions, &actions, &aoi);
        let b = env.env_step(4, &positions, &actions, &aoi);
        assert_eq!(a.record, b.record);
    }

    #[test]
    fn step_age_equals_direct_update_of_the_union() {
        let env = tiny_env(7, 12, 4, 2);
        let aoi = env.initial_aoi().update(&[]).update(&[1]);
        let actions = [
            AgentAction { direction: Direction::Hover, cluster: 0 },
            AgentAction { direction: Direction::Hover, cluster: 2 },
        ];
        let outcome = env.env_step(0, &env.start_positions(), &actions, &aoi);
        let union: Vec<usize> = env
            .devices
            .iter()
            .filter(|d| d.cluster_id == 0 || d.cluster_id == 2)
            .map(|d| d.id)
            .collect();
        assert_eq!(outcome.aoi, aoi.update(&union));
    }

    #[test]
    fn rewards_share_the_age_term() {
        let env = tiny_env(7, 12, 4, 3);
        let actions = [
            AgentAction { direction: Direction::Hover, cluster: 0 },
            AgentAction { direction: Direction::North, cluster: 1 },
            AgentAction { direction: Direction::East, cluster: 2 },
        ];
        let outcome = env.env_step(0, &env.start_positions(), &actions, &env.initial_aoi());
        // subtracting each UAV's own power term must leave the same age term
        let zeta = env.reward.power_penalty / env.capacity as f64;
        let age_terms: Vec<f64> = (0..3)
            .map(|u| {
                let own_power: f64 = env
                    .devices
                    .iter()
                    .filter(|d| d.cluster_id == actions[u].cluster)
                    .map(|d| outcome.powers[d.id])
                    .sum();
                outcome.rewards[u] + zeta * own_power
            })
            .collect();
        for pair in age_terms.windows(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-12);
        }
        assert!((age_terms[0] + outcome.record.weighted_age).abs() < 1e-12);
    }

    #[test]
    fn joint_reward_collapses_to_per_uav_reward_for_one_uav() {
        let env = tiny_env(7, 12, 4, 1);
        let outcome = env.env_step(
            0,
            &env.start_positions(),
            &[AgentAction { direction: Direction::West, cluster: 1 }],
            &env.initial_aoi(),
        );
        assert!((env.joint_reward(&outcome.record) - outcome.rewards[0]).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn encoded_features_stay_in_unit_interval(
            x in 0u32..11,
            y in 0u32..11,
            age_seed in 1u32..30,
            peer in 0usize..20,
        ) {
            let env = tiny_env(11, 8, 4, 1);
            let encoder = StateEncoder::new(
                &env.world,
                &env.clusters,
                AgeObservation::ClusterMax,
                1,
                1,
            )
            .with_max_age(env.max_age);
            let state = AgentState {
                uav_cells: vec![Cell::new(x, y)],
                ages: (0..8).map(|d| 1 + (age_seed + d) % 30).collect(),
                peer_actions: vec![peer % (5 * env.num_clusters())],
            };
            let features = encoder.encode(&state);
            prop_assert_eq!(features.len(), encoder.input_width());
            for &f in &features {
                prop_assert!((0.0..=1.0).contains(&f));
            }
        }
    }
}
