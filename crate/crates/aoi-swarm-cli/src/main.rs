//! Command-line front end: run experiment matrices, summarize result files,
//! exercise the small-instance oracles, and validate configurations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aoi_swarm::config::{RunConfig, DESK_PROFILE, PAPER_PROFILE};
use aoi_swarm::matrix::{read_rows, render_summary, run_matrix, summarize};
use aoi_swarm::oracle::{oracle_env, run_dp_tabular_suite, run_dqn_oracle};

#[derive(Parser)]
#[command(name = "aoi-swarm", version, about = "UAV swarm age-of-information simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Profile {
    /// Small matrix that trains on a single CPU core.
    Desk,
    /// The full-scale published configuration.
    Paper,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to a TOML run configuration.
    #[arg(long, conflicts_with = "profile")]
    config: Option<PathBuf>,
    /// Built-in configuration profile.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the sweep seeds (comma-separated).
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

impl ConfigArgs {
    fn load(&self) -> aoi_swarm::Result<RunConfig> {
        let mut config = match (&self.config, self.profile) {
            (Some(path), _) => RunConfig::from_path(path)?,
            (None, Some(Profile::Desk)) => RunConfig::from_toml_str(DESK_PROFILE, "desk profile")?,
            (None, Some(Profile::Paper)) => {
                RunConfig::from_toml_str(PAPER_PROFILE, "paper profile")?
            }
            (None, None) => RunConfig::from_toml_str(DESK_PROFILE, "desk profile")?,
        };
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if !self.seeds.is_empty() {
            config.sweep.seeds = self.seeds.clone();
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment matrix from a configuration.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Worker threads for independent sweep points.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Aggregate result rows into per-scheme comparison tables.
    Summarize {
        /// Path to a results.csv produced by `run`.
        rows: PathBuf,
    },
    /// Solve the small oracle instance exactly and with tabular Q-learning;
    /// optionally train the neural learner on it too.
    Oracle {
        /// Also train the DQN on the instance (slower).
        #[arg(long)]
        dqn: bool,
    },
    /// Parse and validate a configuration without running anything.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> aoi_swarm::Result<()> {
    match cli.command {
        Command::Run { config, jobs } => {
            let config = config.load()?;
            let jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let points = config.sweep_points();
            eprintln!(
                "running {} sweep points with {} worker(s) into {}",
                points.len(),
                jobs,
                config.output.dir.display()
            );
            let outcome = run_matrix(&config, jobs)?;
            eprintln!(
                "done: {} rows, {} failed points",
                outcome.rows.len(),
                outcome.errors.len()
            );
            for err in &outcome.errors {
                eprintln!("  {}: {}", err.label, err.message);
            }
            print!("{}", render_summary(&summarize(&outcome.rows)));
            Ok(())
        }
        Command::Summarize { rows } => {
            let rows = read_rows(&rows)?;
            print!("{}", render_summary(&summarize(&rows)));
            Ok(())
        }
        Command::Oracle { dqn } => {
            let env = oracle_env();
            let (dp, report) = run_dp_tabular_suite(&env, 0.99)?;
            println!("instance: 3x3 grid, 4 devices, 2 clusters, 1 UAV, 10 frames");
            println!("optimal return (dynamic programming): {:.6}", dp.value);
            println!(
                "tabular greedy return: {:.6} (gap {:.3}%)",
                report.tabular_return,
                report.tabular_gap * 100.0
            );
            if dqn {
                let outcome = run_dqn_oracle(&env, dp.value)?;
                println!(
                    "dqn greedy return: {:.6} (gap {:.3}%)",
                    outcome.greedy_return,
                    outcome.gap * 100.0
                );
            }
            Ok(())
        }
        Command::Validate { config } => {
            let config = config.load()?;
            config.validate()?;
            let points = config.sweep_points();
            println!(
                "configuration valid: {} sweep points over {} seed(s)",
                points.len(),
                config.sweep.seeds.len()
            );
            for point in points.iter().take(1) {
                let env = config.build_env(point)?;
                println!(
                    "first point: {} {} at {:.3} Mb/s, {} UAVs, {} devices in {} clusters (capacity {})",
                    point.scheme,
                    point.duplex,
                    point.tx_rate_bps / 1e6,
                    point.uav_count,
                    env.num_devices(),
                    env.num_clusters(),
                    env.capacity
                );
            }
            Ok(())
        }
    }
}
