//! Run configuration: TOML sections mirroring the module configs, strict
//! parsing (unknown keys are errors), physical-consistency validation, and
//! expansion of the sweep axes into concrete run points.
//!
//! An empty config file resolves to the full set of defaults: 30 dB
//! reference gain, -100 dBm noise, 1 MHz bandwidth, 5 Mb packets, 100 m
//! flight height, 15 m base station, 25 m/s velocity, 100 m cells, age cap
//! 30, power penalty 5, 60-frame episodes, learning rate 1e-4, discount
//! 0.99.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{
    cluster_capacity, db_to_linear, dbm_to_watts, nav_time, CycleTiming, Duplex, LinkBudget,
    RateConfig,
};
use crate::dqn::{EpsilonSchedule, TrainConfig};
use crate::error::{Error, Result};
use crate::mdp::{guarded_action_space_size, AgeObservation, SwarmEnv};
use crate::schemes::Scheme;
use crate::world::{cluster_devices, place_devices, Cell, GridWorld, UavConfig, WorldConfig};

/// The desk-scale profile shipped with the repository.
pub const DESK_PROFILE: &str = include_str!("../../../profiles/desk.toml");
/// Full-scale profile with the published default parameters.
pub const PAPER_PROFILE: &str = include_str!("../../../profiles/paper.toml");

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub world: WorldSection,
    pub devices: DeviceSection,
    pub uav: UavSection,
    pub channel: ChannelSection,
    pub reward: RewardSection,
    pub train: TrainSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldSection {
    pub grid_cells_x: u32,
    pub grid_cells_y: u32,
    pub cell_size_m: f64,
    pub bs_cell: Option<[u32; 2]>,
    pub bs_height_m: f64,
    pub restricted_cells: Vec<[u32; 2]>,
    /// Defaults to the navigation time (cell size / velocity).
    pub frame_duration_s: Option<f64>,
    /// Device placement stream; shared by every sweep point so layouts are
    /// comparable across schemes.
    pub placement_seed: u64,
}

impl Default for WorldSection {
    fn default() -> Self {
        WorldSection {
            grid_cells_x: 11,
            grid_cells_y: 11,
            cell_size_m: 100.0,
            bs_cell: None,
            bs_height_m: 15.0,
            restricted_cells: Vec::new(),
            frame_duration_s: None,
            placement_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSection {
    pub count: usize,
}

impl Default for DeviceSection {
    fn default() -> Self {
        DeviceSection { count: 300 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UavSection {
    pub height_m: f64,
    pub velocity_mps: f64,
    pub start_cells: Vec<[u32; 2]>,
}

impl Default for UavSection {
    fn default() -> Self {
        UavSection {
            height_m: 100.0,
            velocity_mps: 25.0,
            start_cells: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub beta0_db: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
    pub packet_bits: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            beta0_db: 30.0,
            noise_dbm: -100.0,
            bandwidth_hz: 1e6,
            packet_bits: 5e6,
        }
    }
}

impl ChannelSection {
    pub fn budget(&self) -> LinkBudget {
        LinkBudget {
            beta0: db_to_linear(self.beta0_db),
            noise_power: dbm_to_watts(self.noise_dbm),
            bandwidth: self.bandwidth_hz,
            packet_size: self.packet_bits,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    pub power_penalty: f64,
    pub max_age: u32,
}

impl Default for RewardSection {
    fn default() -> Self {
        RewardSection {
            power_penalty: 5.0,
            max_age: 30,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub discount: f64,
    pub episodes: usize,
    pub frames_per_episode: usize,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub target_sync_interval: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_fraction: f64,
    pub train_period_frames: usize,
    pub age_observation: AgeObservation,
    pub joint_space_cap: u128,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            learning_rate: 1e-4,
            discount: 0.99,
            episodes: 100_000,
            frames_per_episode: 60,
            batch_size: 64,
            replay_capacity: 50_000,
            target_sync_interval: 500,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.6,
            train_period_frames: 1,
            age_observation: AgeObservation::ClusterMax,
            joint_space_cap: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub tx_rates_bps: Vec<f64>,
    pub uav_counts: Vec<usize>,
    pub duplex_modes: Vec<Duplex>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            tx_rates_bps: vec![31.25e6],
            uav_counts: vec![10],
            duplex_modes: vec![Duplex::Full],
            schemes: Scheme::ALL.to_vec(),
            seeds: vec![1],
        }
    }
}

/// Which episodes get their per-frame records written out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameLog {
    None,
    Final,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Trailing fraction of episodes averaged into the evaluation metric.
    pub evaluation_window: f64,
    pub frame_log: FrameLog,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            evaluation_window: 0.1,
            frame_log: FrameLog::Final,
        }
    }
}

/// One concrete (sweep point, seed) combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPoint {
    pub scheme: Scheme,
    pub duplex: Duplex,
    pub tx_rate_bps: f64,
    pub uav_count: usize,
    pub seed: u64,
    /// Position in the expanded sweep, for stable output ordering.
    pub index: usize,
}

impl RunPoint {
    /// File-system friendly label, unique within a matrix.
    pub fn label(&self) -> String {
        format!(
            "{}_{}_r{:.3}Mbps_u{}_s{}",
            self.scheme.label().to_ascii_lowercase().replace('-', ""),
            self.duplex.label(),
            self.tx_rate_bps / 1e6,
            self.uav_count,
            self.seed
        )
    }
}

impl RunConfig {
    /// Parse a TOML string; unknown keys anywhere are errors.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            grid_cells_x: self.world.grid_cells_x,
            grid_cells_y: self.world.grid_cells_y,
            cell_size_m: self.world.cell_size_m,
            bs_cell: self.world.bs_cell.map(|c| Cell::new(c[0], c[1])),
            bs_height_m: self.world.bs_height_m,
            restricted_cells: self
                .world
                .restricted_cells
                .iter()
                .map(|c| Cell::new(c[0], c[1]))
                .collect(),
            frame_duration_s: self
                .world
                .frame_duration_s
                .unwrap_or_else(|| nav_time(self.world.cell_size_m, self.uav.velocity_mps)),
            rng_seed: self.world.placement_seed,
        }
    }

    /// Expand the sweep axes, seeds innermost.
    pub fn sweep_points(&self) -> Vec<RunPoint> {
        let mut points = Vec::new();
        let mut index = 0;
        for &scheme in &self.sweep.schemes {
            for &duplex in &self.sweep.duplex_modes {
                for &tx_rate_bps in &self.sweep.tx_rates_bps {
                    for &uav_count in &self.sweep.uav_counts {
                        for &seed in &self.sweep.seeds {
                            points.push(RunPoint {
                                scheme,
                                duplex,
                                tx_rate_bps,
                                uav_count,
                                seed,
                                index,
                            });
                            index += 1;
                        }
                    }
                }
            }
        }
        points
    }

    /// Build the environment for one run point.
    pub fn build_env(&self, point: &RunPoint) -> Result<SwarmEnv> {
        let world = GridWorld::new(&self.world_config())?;
        let budget = self.channel.budget();
        budget.validate()?;
        let rate = RateConfig {
            tx_rate: point.tx_rate_bps,
            duplex: point.duplex,
        };
        let capacity = cluster_capacity(
            rate,
            world.cell_size(),
            self.uav.velocity_mps,
            budget.packet_size,
        )?;
        if self.devices.count < 1 {
            return Err(Error::InvalidConfig("device count must be positive".into()));
        }
        let mut devices = place_devices(&world, self.devices.count, world.seed());
        let clusters = cluster_devices(&mut devices, capacity);
        let uav = UavConfig {
            count: point.uav_count,
            height: self.uav.height_m,
            velocity: self.uav.velocity_mps,
            duplex: point.duplex,
            start_cells: self
                .uav
                .start_cells
                .iter()
                .map(|c| Cell::new(c[0], c[1]))
                .collect(),
        };
        uav.validate(&world)?;
        Ok(SwarmEnv {
            timing: CycleTiming::new(world.cell_size(), self.uav.velocity_mps, point.duplex),
            reward: crate::aoi::RewardConfig::uniform(self.devices.count, self.reward.power_penalty),
            world,
            devices,
            clusters,
            budget,
            rate,
            uav,
            capacity,
            max_age: self.reward.max_age,
            frames_per_episode: self.train.frames_per_episode,
        })
    }

    /// Learner hyperparameters for one run point. The run's RNG streams key
    /// off the sweep's seed value, so schemes with the same seed share
    /// initialization streams and stay directly comparable.
    pub fn train_config(&self, point: &RunPoint) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            discount: self.train.discount,
            episodes: self.train.episodes,
            batch_size: self.train.batch_size,
            replay_capacity: self.train.replay_capacity,
            target_sync_interval: self.train.target_sync_interval,
            epsilon: EpsilonSchedule {
                start: self.train.epsilon_start,
                end: self.train.epsilon_end,
                decay_fraction: self.train.epsilon_decay_fraction,
            },
            seed: point.seed,
            train_period_frames: self.train.train_period_frames,
            age_observation: self.train.age_observation,
            joint_space_cap: self.train.joint_space_cap,
        }
    }

    /// Sweep-independent sanity checks; a run aborts on these, while
    /// per-point problems only fail their own rows.
    pub fn validate_global(&self) -> Result<()> {
        if self.sweep.seeds.is_empty() {
            return Err(Error::InvalidConfig("sweep.seeds must be nonempty".into()));
        }
        if self.sweep.schemes.is_empty()
            || self.sweep.tx_rates_bps.is_empty()
            || self.sweep.duplex_modes.is_empty()
            || self.sweep.uav_counts.is_empty()
        {
            return Err(Error::InvalidConfig(
                "every sweep axis needs at least one entry".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.output.evaluation_window) {
            return Err(Error::InvalidConfig(
                "output.evaluation_window must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Validate one sweep point: world geometry, capacity of at least one
    /// device per frame, and joint-action-space feasibility for the
    /// centralized scheme.
    pub fn validate_point(&self, point: &RunPoint) -> Result<()> {
        let env = self.build_env(point)?;
        if point.scheme.is_joint() {
            guarded_action_space_size(
                env.num_clusters(),
                env.num_uavs(),
                self.train.joint_space_cap,
            )?;
        }
        Ok(())
    }

    /// Full validation of every sweep point without running anything.
    pub fn validate(&self) -> Result<()> {
        self.validate_global()?;
        for point in self.sweep_points() {
            self.validate_point(&point)?;
        }
        Ok(())
    }
}
