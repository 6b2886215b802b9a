//! Episode execution and training loops for every scheme.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{count_messages, derive_seed, AccountingCounters, Learner, Scheme};
use crate::aoi::AoiState;
use crate::dqn::{
    uniform_masked, TrainConfig, TrainerCheckpoint, CHECKPOINT_VERSION,
};
use crate::error::Result;
use crate::mdp::{
    guarded_action_space_size, joint_action_from_index, valid_action_mask, AgentAction,
    AgentState, FrameRecord, StateEncoder, SwarmEnv,
};

/// Everything recorded about one episode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpisodeLog {
    /// Per-frame records; empty unless the episode was run with recording.
    pub frames: Vec<FrameRecord>,
    /// Undiscounted return per UAV.
    pub returns: Vec<f64>,
    pub mean_weighted_age: f64,
    pub mean_total_power: f64,
    /// Mean TD loss over the episode's gradient steps, when any ran.
    pub mean_loss: Option<f64>,
    /// Cumulative run counters as of the end of this episode.
    pub counters: AccountingCounters,
}

/// One point of the learning curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean_weighted_age: f64,
    pub mean_return: f64,
    pub epsilon: f64,
    pub mean_loss: Option<f64>,
}

/// Result of a full training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub curve: Vec<CurvePoint>,
    /// Mean weighted age over the evaluation window (the trailing fraction
    /// of episodes, where epsilon has reached its floor).
    pub eval_mean_age: f64,
    pub eval_mean_power: f64,
    pub counters: AccountingCounters,
    pub episodes: usize,
    /// The last episode, with frames recorded when requested.
    pub final_episode: Option<EpisodeLog>,
}

/// Drives one configuration point: owns the environment, encoders, and
/// learners for a single scheme.
pub struct SchemeRunner {
    pub scheme: Scheme,
    pub env: SwarmEnv,
    pub config: TrainConfig,
    pub counters: AccountingCounters,
    pub episodes_done: usize,
    encoders: Vec<StateEncoder>,
    learners: Vec<Learner>,
    rw_rng: ChaCha8Rng,
}

impl SchemeRunner {
    /// Build the learners for a scheme. Refuses centralized configurations
    /// whose joint action space exceeds the configured cap.
    pub fn new(scheme: Scheme, env: SwarmEnv, config: TrainConfig) -> Result<Self> {
        let num_uavs = env.num_uavs();
        let num_clusters = env.num_clusters();
        let mode = config.age_observation;

        let mut encoders = Vec::new();
        let mut learners = Vec::new();
        match scheme {
            Scheme::Centralized => {
                let joint_size =
                    guarded_action_space_size(num_clusters, num_uavs, config.joint_space_cap)?;
                let encoder = StateEncoder::new(&env.world, &env.clusters, mode, num_uavs, 0)
                    .with_max_age(env.max_age);
                learners.push(Learner::new(
                    encoder.input_width(),
                    joint_size,
                    &config,
                    derive_seed(config.seed, 0),
                ));
                encoders.push(encoder);
            }
            Scheme::Cooperative
            | Scheme::PartiallyCooperative
            | Scheme::Decentralized => {
                let per_agent =
                    guarded_action_space_size(num_clusters, 1, config.joint_space_cap)?;
                for u in 0..num_uavs {
                    let peer_blocks = if scheme == Scheme::Cooperative { u } else { 0 };
                    let encoder =
                        StateEncoder::new(&env.world, &env.clusters, mode, 1, peer_blocks)
                            .with_max_age(env.max_age);
                    learners.push(Learner::new(
                        encoder.input_width(),
                        per_agent,
                        &config,
                        derive_seed(config.seed, u as u64),
                    ));
                    encoders.push(encoder);
                }
            }
            Scheme::RandomWalk => {}
        }

        let rw_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, u64::from(u32::MAX)));
        Ok(SchemeRunner {
            scheme,
            env,
            config,
            counters: AccountingCounters::default(),
            episodes_done: 0,
            encoders,
            learners,
            rw_rng,
        })
    }

    pub fn learners(&self) -> &[Learner] {
        &self.learners
    }

    /// Execute one episode. `epsilon` drives exploration, `learn` enables
    /// gradient steps, `record` keeps the per-frame records.
    pub fn run_episode(&mut self, epsilon: f64, learn: bool, record: bool) -> Result<EpisodeLog> {
        let start = Instant::now();
        let num_uavs = self.env.num_uavs();
        let num_clusters = self.env.num_clusters();
        let frames_total = self.env.frames_per_episode;

        let mut positions = self.env.start_positions();
        let mut aoi = self.env.initial_aoi();
        let mut beliefs: Vec<AoiState> = if self.scheme == Scheme::Decentralized {
            vec![self.env.initial_aoi(); num_uavs]
        } else {
            Vec::new()
        };

        let mut returns = vec![0.0; num_uavs];
        let mut age_sum = 0.0;
        let mut power_sum = 0.0;
        let mut loss_sum = 0.0;
        let mut loss_count = 0u32;
        let mut frames = Vec::with_capacity(if record { frames_total } else { 0 });
        let mut macs: u64 = 0;

        for frame in 0..frames_total {
            // Selection. Lower-indexed UAVs always act first, which is what
            // the cooperative scheme's serial protocol relies on.
            let mut actions: Vec<AgentAction> = Vec::with_capacity(num_uavs);
            let mut selected: Vec<(Vec<f64>, usize)> = Vec::new();
            match self.scheme {
                Scheme::RandomWalk => {
                    for u in 0..num_uavs {
                        let obs = AgentState {
                            uav_cells: vec![positions[u]],
                            ages: Vec::new(),
                            peer_actions: Vec::new(),
                        };
                        let mask = valid_action_mask(&obs, &self.env.world, num_clusters);
                        let idx = uniform_masked(&mask, &mut self.rw_rng)?;
                        actions.push(AgentAction::from_index(idx, num_clusters));
                    }
                }
                Scheme::Centralized => {
                    let obs = AgentState {
                        uav_cells: positions.clone(),
                        ages: aoi.ages().to_vec(),
                        peer_actions: Vec::new(),
                    };
                    let features = self.encoders[0].encode(&obs);
                    self.learners[0].finish_pending(&features, false);
                    let mask = valid_action_mask(&obs, &self.env.world, num_clusters);
                    let idx = self.learners[0].select(&features, &mask, epsilon, &mut macs)?;
                    actions = joint_action_from_index(idx, num_clusters, num_uavs);
                    selected.push((features, idx));
                }
                Scheme::Cooperative => {
                    let mut taken: Vec<usize> = Vec::with_capacity(num_uavs);
                    for u in 0..num_uavs {
                        let obs = AgentState {
                            uav_cells: vec![positions[u]],
                            ages: aoi.ages().to_vec(),
                            peer_actions: taken.clone(),
                        };
                        let features = self.encoders[u].encode(&obs);
                        self.learners[u].finish_pending(&features, false);
                        let mask = valid_action_mask(&obs, &self.env.world, num_clusters);
                        let idx = self.learners[u].select(&features, &mask, epsilon, &mut macs)?;
                        taken.push(idx);
                        actions.push(AgentAction::from_index(idx, num_clusters));
                        selected.push((features, idx));
                    }
                }
                Scheme::PartiallyCooperative | Scheme::Decentralized => {
                    for u in 0..num_uavs {
                        let ages = if self.scheme == Scheme::Decentralized {
                            beliefs[u].ages().to_vec()
                        } else {
                            aoi.ages().to_vec()
                        };
                        let obs = AgentState {
                            uav_cells: vec![positions[u]],
                            ages,
                            peer_actions: Vec::new(),
                        };
                        let features = self.encoders[u].encode(&obs);
                        self.learners[u].finish_pending(&features, false);
                        let mask = valid_action_mask(&obs, &self.env.world, num_clusters);
                        let idx = self.learners[u].select(&features, &mask, epsilon, &mut macs)?;
                        actions.push(AgentAction::from_index(idx, num_clusters));
                        selected.push((features, idx));
                    }
                }
            }

            let outcome = self.env.env_step(frame, &positions, &actions, &aoi);

            // Queue transitions; they complete at the next selection (or the
            // episode end), once the successor observation exists.
            match self.scheme {
                Scheme::Centralized => {
                    let (features, idx) = selected.pop().expect("joint selection ran");
                    let reward = self.env.joint_reward(&outcome.record);
                    self.learners[0].pending = Some((features, idx, reward));
                }
                Scheme::Cooperative
                | Scheme::PartiallyCooperative
                | Scheme::Decentralized => {
                    for (u, (features, idx)) in selected.drain(..).enumerate() {
                        self.learners[u].pending = Some((features, idx, outcome.rewards[u]));
                    }
                }
                Scheme::RandomWalk => {}
            }

            // A decentralized agent only sees its own services: its belief
            // resets the cluster it chose and ages everything else.
            if self.scheme == Scheme::Decentralized {
                for (u, action) in actions.iter().enumerate() {
                    let members = &self.env.clusters[action.cluster].member_ids;
                    beliefs[u] = beliefs[u].update(members);
                }
            }

            if learn && (frame + 1) % self.config.train_period_frames == 0 {
                for learner in self.learners.iter_mut() {
                    if let Some(loss) = learner.train_step(&self.config, &mut macs) {
                        loss_sum += loss;
                        loss_count += 1;
                    }
                }
            }

            for (u, &r) in outcome.rewards.iter().enumerate() {
                returns[u] += r;
            }
            age_sum += outcome.record.weighted_age;
            power_sum += outcome.record.total_power;
            positions = outcome.positions;
            aoi = outcome.aoi;
            if record {
                frames.push(outcome.record);
            }
        }

        // Terminal observations complete the last pending transitions; the
        // bootstrap is dropped on terminal samples so peer blocks stay zero.
        match self.scheme {
            Scheme::Centralized => {
                let obs = AgentState {
                    uav_cells: positions.clone(),
                    ages: aoi.ages().to_vec(),
                    peer_actions: Vec::new(),
                };
                let features = self.encoders[0].encode(&obs);
                self.learners[0].finish_pending(&features, true);
            }
            Scheme::Cooperative | Scheme::PartiallyCooperative | Scheme::Decentralized => {
                for u in 0..num_uavs {
                    let ages = if self.scheme == Scheme::Decentralized {
                        beliefs[u].ages().to_vec()
                    } else {
                        aoi.ages().to_vec()
                    };
                    let obs = AgentState {
                        uav_cells: vec![positions[u]],
                        ages,
                        peer_actions: Vec::new(),
                    };
                    let features = self.encoders[u].encode(&obs);
                    self.learners[u].finish_pending(&features, true);
                }
            }
            Scheme::RandomWalk => {}
        }

        self.counters.messages += count_messages(self.scheme, num_uavs);
        self.counters.mac_ops += macs;
        self.counters.wall_time_s += start.elapsed().as_secs_f64();

        let frames_f = frames_total as f64;
        Ok(EpisodeLog {
            frames,
            returns,
            mean_weighted_age: age_sum / frames_f,
            mean_total_power: power_sum / frames_f,
            mean_loss: (loss_count > 0).then(|| loss_sum / loss_count as f64),
            counters: self.counters,
        })
    }

    /// Run the full episode budget, annealing epsilon, and summarize the
    /// evaluation window.
    pub fn train(&mut self, eval_window: f64, record_final: bool) -> Result<TrainOutcome> {
        self.train_up_to(self.config.episodes, eval_window, record_final)
    }

    /// Run at most `limit` episodes of the configured budget, for
    /// checkpoint-and-resume workflows. Epsilon annealing and the
    /// evaluation window always follow the full budget.
    pub fn train_up_to(
        &mut self,
        limit: usize,
        eval_window: f64,
        record_final: bool,
    ) -> Result<TrainOutcome> {
        let total = self.config.episodes;
        let limit = limit.min(total);
        let eval_len = ((total as f64 * eval_window).round() as usize).clamp(1, total);
        let eval_start = total - eval_len;
        let mut curve = Vec::with_capacity(total - self.episodes_done);
        let mut eval_age = 0.0;
        let mut eval_power = 0.0;
        let mut eval_count = 0usize;
        let mut final_episode = None;

        while self.episodes_done < limit {
            let episode = self.episodes_done;
            let epsilon = self.config.epsilon.at(episode, total);
            let is_last = episode + 1 == total;
            let log = self.run_episode(epsilon, self.scheme.is_learning(), record_final && is_last)?;
            let mean_return = log.returns.iter().sum::<f64>() / log.returns.len().max(1) as f64;
            curve.push(CurvePoint {
                episode,
                mean_weighted_age: log.mean_weighted_age,
                mean_return,
                epsilon,
                mean_loss: log.mean_loss,
            });
            if episode >= eval_start {
                eval_age += log.mean_weighted_age;
                eval_power += log.mean_total_power;
                eval_count += 1;
            }
            if is_last {
                final_episode = Some(log);
            }
            self.episodes_done += 1;
        }

        Ok(TrainOutcome {
            curve,
            eval_mean_age: eval_age / eval_count.max(1) as f64,
            eval_mean_power: eval_power / eval_count.max(1) as f64,
            counters: self.counters,
            episodes: total,
            final_episode,
        })
    }

    pub fn to_checkpoint(&self) -> TrainerCheckpoint {
        TrainerCheckpoint {
            version: CHECKPOINT_VERSION,
            scheme: self.scheme.label().to_string(),
            episodes_done: self.episodes_done,
            total_episodes: self.config.episodes,
            epsilon_current: self
                .config
                .epsilon
                .at(self.episodes_done, self.config.episodes),
            learners: self.learners.iter().map(Learner::to_checkpoint).collect(),
            messages: self.counters.messages,
            mac_ops: self.counters.mac_ops,
            rw_rng: self.rw_rng.clone(),
        }
    }

    /// Rebuild a runner from a checkpoint and continue bit-exactly.
    pub fn resume(
        scheme: Scheme,
        env: SwarmEnv,
        config: TrainConfig,
        checkpoint: TrainerCheckpoint,
    ) -> Result<Self> {
        checkpoint.check_version()?;
        let mut runner = SchemeRunner::new(scheme, env, config)?;
        runner.learners = checkpoint
            .learners
            .into_iter()
            .map(Learner::from_checkpoint)
            .collect();
        runner.episodes_done = checkpoint.episodes_done;
        runner.counters.messages = checkpoint.messages;
        runner.counters.mac_ops = checkpoint.mac_ops;
        runner.rw_rng = checkpoint.rw_rng;
        Ok(runner)
    }
}

/// Mean undiscounted per-UAV return of one greedy (epsilon = 0) episode,
/// without learning.
pub fn greedy_return(runner: &mut SchemeRunner) -> Result<f64> {
    let log = runner.run_episode(0.0, false, false)?;
    Ok(log.returns.iter().sum::<f64>() / log.returns.len() as f64)
}

/// Drive the environment with a fixed action log and accumulate the same
/// metrics an episode run would. The age dynamics depend only on the
/// executed joint actions, never on the scheme.
pub fn replay_episode(env: &SwarmEnv, actions_per_frame: &[Vec<AgentAction>]) -> EpisodeLog {
    let mut positions = env.start_positions();
    let mut aoi = env.initial_aoi();
    let mut returns = vec![0.0; env.num_uavs()];
    let mut age_sum = 0.0;
    let mut power_sum = 0.0;
    let mut frames = Vec::with_capacity(actions_per_frame.len());
    for (frame, actions) in actions_per_frame.iter().enumerate() {
        let outcome = env.env_step(frame, &positions, actions, &aoi);
        for (u, &r) in outcome.rewards.iter().enumerate() {
            returns[u] += r;
        }
        age_sum += outcome.record.weighted_age;
        power_sum += outcome.record.total_power;
        positions = outcome.positions;
        aoi = outcome.aoi;
        frames.push(outcome.record);
    }
    let n = actions_per_frame.len().max(1) as f64;
    EpisodeLog {
        frames,
        returns,
        mean_weighted_age: age_sum / n,
        mean_total_power: power_sum / n,
        mean_loss: None,
        counters: AccountingCounters::default(),
    }
}
