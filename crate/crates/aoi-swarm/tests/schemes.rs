//! Cross-module behavior of the training schemes: observation contents,
//! information-flow differences, degeneracies, and resumption.

use aoi_swarm::aoi::AoiState;
use aoi_swarm::dqn::{EpsilonSchedule, TrainConfig};
use aoi_swarm::mdp::{AgeObservation, AgentAction, SwarmEnv};
use aoi_swarm::schemes::{greedy_return, replay_episode, Scheme, SchemeRunner};

fn quick_config(episodes: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-3,
        discount: 0.99,
        episodes,
        batch_size: 8,
        replay_capacity: 4000,
        target_sync_interval: 50,
        epsilon: EpsilonSchedule::default(),
        seed,
        train_period_frames: 2,
        age_observation: AgeObservation::ClusterMax,
        joint_space_cap: 1_000_000,
    }
}

fn small_env(uavs: usize) -> SwarmEnv {
    let mut env = SwarmEnv::small(5, 12, 4, uavs, 9);
    env.frames_per_episode = 20;
    env
}

#[test]
fn random_walk_episodes_are_deterministic_and_learn_nothing() {
    let run = |()| {
        let mut runner =
            SchemeRunner::new(Scheme::RandomWalk, small_env(2), quick_config(5, 3)).unwrap();
        runner.train(0.2, true).unwrap()
    };
    let a = run(());
    let b = run(());
    assert!(a.curve.iter().all(|p| p.mean_loss.is_none()));
    for (pa, pb) in a.curve.iter().zip(&b.curve) {
        assert_eq!(pa.mean_weighted_age, pb.mean_weighted_age);
        assert_eq!(pa.mean_return, pb.mean_return);
    }
    let fa = &a.final_episode.as_ref().unwrap().frames;
    let fb = &b.final_episode.as_ref().unwrap().frames;
    assert_eq!(fa, fb);
    assert_eq!(fa.len(), 20);
}

#[test]
fn cooperative_states_carry_lower_indexed_peer_actions() {
    let env = small_env(2);
    let num_clusters = env.num_clusters();
    let per_agent_actions = 5 * num_clusters;
    let mut runner = SchemeRunner::new(Scheme::Cooperative, env, quick_config(3, 1)).unwrap();
    let outcome = runner.train(0.5, true).unwrap();
    let frames = &outcome.final_episode.as_ref().unwrap().frames;

    let base_width = 2 + num_clusters;
    let learners = runner.learners();
    assert_eq!(learners[0].net.input_width(), base_width);
    assert_eq!(learners[1].net.input_width(), base_width + per_agent_actions);

    // the second learner's stored observations one-hot the first UAV's
    // action of the same frame
    let buffer = &learners[1].buffer;
    assert!(buffer.len() >= frames.len());
    let offset = buffer.len() - frames.len();
    for (i, frame) in frames.iter().enumerate() {
        let tr = buffer.get(offset + i);
        let block = &tr.state[base_width..];
        let hot: Vec<usize> = block
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect();
        assert_eq!(hot, vec![frame.action_indices[0]], "frame {i}");
    }
    // while the first learner's observations have no peer block at all
    let first = learners[0].buffer.get(0);
    assert_eq!(first.state.len(), base_width);
}

#[test]
fn decentralized_agents_observe_their_own_belief_not_the_truth() {
    let env = small_env(2);
    let num_clusters = env.num_clusters();
    let max_age = env.max_age;
    let cluster_members: Vec<Vec<usize>> = env
        .clusters
        .iter()
        .map(|c| c.member_ids.clone())
        .collect();
    let mut runner = SchemeRunner::new(Scheme::Decentralized, env, quick_config(1, 4)).unwrap();
    let outcome = runner.train(1.0, true).unwrap();
    let frames = &outcome.final_episode.as_ref().unwrap().frames;

    // reconstruct UAV 1's belief: it only sees its own services
    let mut belief = AoiState::new(12, max_age);
    let learners = runner.learners();
    let buffer = &learners[1].buffer;
    let offset = buffer.len() - frames.len();
    let mut diverged = false;
    for (i, frame) in frames.iter().enumerate() {
        // the observation stored at frame i was taken before the step
        let tr = buffer.get(offset + i);
        let observed_ages = &tr.state[2..2 + num_clusters];
        for (c, members) in cluster_members.iter().enumerate() {
            let believed = members.iter().map(|&d| belief.ages()[d]).max().unwrap();
            assert_eq!(
                observed_ages[c],
                believed as f64 / max_age as f64,
                "frame {i} cluster {c}"
            );
        }
        // true ages of the same frame (pre-step = previous frame's post)
        if i > 0 {
            let true_ages = &frames[i - 1].ages;
            let believed_ages: Vec<u32> = (0..12).map(|d| belief.ages()[d]).collect();
            if believed_ages != *true_ages {
                diverged = true;
            }
        }
        belief = belief.update(&cluster_members[frame.chosen_clusters[1]]);
    }
    assert!(diverged, "the peer's services never made the belief stale");
}

#[test]
fn all_schemes_collapse_to_the_same_run_for_a_single_uav() {
    let mut logs = Vec::new();
    for scheme in [
        Scheme::Centralized,
        Scheme::Cooperative,
        Scheme::PartiallyCooperative,
        Scheme::Decentralized,
    ] {
        let mut runner = SchemeRunner::new(scheme, small_env(1), quick_config(12, 5)).unwrap();
        let outcome = runner.train(0.25, true).unwrap();
        logs.push((scheme, outcome));
    }
    let (_, reference) = &logs[0];
    for (scheme, outcome) in &logs[1..] {
        for (a, b) in reference.curve.iter().zip(&outcome.curve) {
            assert_eq!(
                a.mean_weighted_age, b.mean_weighted_age,
                "{scheme} diverged at episode {}",
                a.episode
            );
            assert_eq!(a.mean_return, b.mean_return);
            assert_eq!(a.mean_loss, b.mean_loss);
        }
        assert_eq!(
            reference.final_episode.as_ref().unwrap().frames,
            outcome.final_episode.as_ref().unwrap().frames,
            "{scheme} final episode diverged"
        );
    }
}

#[test]
fn replaying_the_action_log_reproduces_the_metrics() {
    for scheme in [Scheme::Cooperative, Scheme::RandomWalk, Scheme::Centralized] {
        let env = small_env(2);
        let mut runner = SchemeRunner::new(scheme, env.clone(), quick_config(2, 8)).unwrap();
        let outcome = runner.train(1.0, true).unwrap();
        let log = outcome.final_episode.unwrap();
        let actions: Vec<Vec<AgentAction>> = log
            .frames
            .iter()
            .map(|f| {
                f.action_indices
                    .iter()
                    .map(|&idx| AgentAction::from_index(idx, env.num_clusters()))
                    .collect()
            })
            .collect();
        let replayed = replay_episode(&env, &actions);
        assert_eq!(replayed.mean_weighted_age, log.mean_weighted_age);
        assert_eq!(replayed.mean_total_power, log.mean_total_power);
        assert_eq!(replayed.returns, log.returns);
        for (a, b) in replayed.frames.iter().zip(&log.frames) {
            assert_eq!(a.ages, b.ages);
            assert_eq!(a.rewards, b.rewards);
        }
    }
}

#[test]
fn training_runs_are_reproducible_end_to_end() {
    let run = |()| {
        let mut runner =
            SchemeRunner::new(Scheme::Cooperative, small_env(2), quick_config(10, 21)).unwrap();
        runner.train(0.2, false).unwrap()
    };
    let a = run(());
    let b = run(());
    assert_eq!(a.eval_mean_age, b.eval_mean_age);
    assert_eq!(a.counters.mac_ops, b.counters.mac_ops);
    assert_eq!(a.counters.messages, b.counters.messages);
    for (pa, pb) in a.curve.iter().zip(&b.curve) {
        assert_eq!(pa.mean_weighted_age, pb.mean_weighted_age);
        assert_eq!(pa.mean_loss, pb.mean_loss);
    }
}

#[test]
fn checkpoint_resume_is_bit_exact() {
    let env = small_env(2);
    let config = quick_config(14, 31);

    // uninterrupted run
    let mut full = SchemeRunner::new(Scheme::PartiallyCooperative, env.clone(), config.clone())
        .unwrap();
    full.train(0.1, false).unwrap();

    // interrupted at episode 7, serialized to JSON, resumed
    let mut half =
        SchemeRunner::new(Scheme::PartiallyCooperative, env.clone(), config.clone()).unwrap();
    half.train_up_to(7, 0.1, false).unwrap();
    let dir = std::env::temp_dir().join(format!("aoi_swarm_ckpt_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trainer.json");
    aoi_swarm::dqn::save_checkpoint(&path, &half.to_checkpoint()).unwrap();
    let restored = aoi_swarm::dqn::load_checkpoint(&path).unwrap();
    let mut resumed =
        SchemeRunner::resume(Scheme::PartiallyCooperative, env, config, restored).unwrap();
    resumed.train(0.1, false).unwrap();

    for (a, b) in full.learners().iter().zip(resumed.learners()) {
        assert_eq!(a.net, b.net, "resumed weights diverged");
        assert_eq!(a.target, b.target);
        assert_eq!(a.train_steps, b.train_steps);
    }
    assert_eq!(full.counters.mac_ops, resumed.counters.mac_ops);
    let ga = greedy_return(&mut full).unwrap();
    let gb = greedy_return(&mut resumed).unwrap();
    assert_eq!(ga, gb);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn myopic_training_learns_the_immediate_reward_argmax() {
    // single frame, zero discount: the greedy action must match the exact
    // argmax of the one-step reward. The power penalty is boosted so that
    // movement direction matters measurably, making the argmax unique.
    let mut env = SwarmEnv::small(3, 4, 3, 1, 5);
    env.frames_per_episode = 1;
    env.reward.power_penalty = 1e10;
    let config = TrainConfig {
        learning_rate: 1e-3,
        discount: 0.0,
        episodes: 1500,
        batch_size: 16,
        replay_capacity: 4000,
        target_sync_interval: 100,
        epsilon: EpsilonSchedule {
            start: 1.0,
            end: 0.3,
            decay_fraction: 0.5,
        },
        seed: 13,
        train_period_frames: 1,
        age_observation: AgeObservation::ClusterMax,
        joint_space_cap: 1_000_000,
    };
    let mut runner =
        SchemeRunner::new(Scheme::PartiallyCooperative, env.clone(), config).unwrap();
    runner.train(0.1, false).unwrap();
    let greedy_log = runner.run_episode(0.0, false, true).unwrap();
    let learned = greedy_log.frames[0].action_indices[0];

    let mut best = (0usize, f64::NEG_INFINITY);
    for idx in 0..5 * env.num_clusters() {
        let outcome = env.env_step(
            0,
            &env.start_positions(),
            &[AgentAction::from_index(idx, env.num_clusters())],
            &env.initial_aoi(),
        );
        if outcome.rewards[0] > best.1 {
            best = (idx, outcome.rewards[0]);
        }
    }
    assert_eq!(learned, best.0, "learned action is not the reward argmax");
}
