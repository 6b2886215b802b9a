//! Experiment matrix execution: every sweep point times every seed, with
//! machine-readable outputs (CSV result rows, JSONL learning curves and
//! frame logs, two-column plot series) and per-scheme summary tables.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::{FrameLog, RunConfig, RunPoint};
use crate::error::{Error, Result};
use crate::schemes::{SchemeRunner, TrainOutcome};

/// One line of `results.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub duplex: String,
    pub tx_rate_bps: f64,
    pub uavs: usize,
    pub devices: usize,
    pub clusters: usize,
    pub seed: u64,
    /// Mean weighted age over the evaluation window.
    pub mean_weighted_age: f64,
    /// Mean total transmit power per frame over the evaluation window.
    pub mean_power_w: f64,
    /// Control messages per episode.
    pub messages_per_episode: u64,
    /// Mean multiply-accumulate operations per episode.
    pub mac_ops_per_episode: u64,
    /// Mean wall-clock seconds per episode (hardware-dependent; excluded
    /// from determinism comparisons).
    pub wall_time_s_per_episode: f64,
}

/// A failed sweep point, kept alongside the successful rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunError {
    pub label: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct MatrixOutcome {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RunError>,
}

/// Execute one run point to completion.
pub fn execute_run(config: &RunConfig, point: &RunPoint) -> Result<(ResultRow, TrainOutcome)> {
    let env = config.build_env(point)?;
    let train_config = config.train_config(point);
    let devices = env.num_devices();
    let clusters = env.num_clusters();
    let mut runner = SchemeRunner::new(point.scheme, env, train_config)?;
    let record_final = config.output.frame_log == FrameLog::Final;
    let outcome = runner.train(config.output.evaluation_window, record_final)?;
    let episodes = outcome.episodes.max(1) as u64;
    let row = ResultRow {
        scheme: point.scheme.label().to_string(),
        duplex: point.duplex.label().to_string(),
        tx_rate_bps: point.tx_rate_bps,
        uavs: point.uav_count,
        devices,
        clusters,
        seed: point.seed,
        mean_weighted_age: outcome.eval_mean_age,
        mean_power_w: outcome.eval_mean_power,
        messages_per_episode: outcome.counters.messages / episodes,
        mac_ops_per_episode: outcome.counters.mac_ops / episodes,
        wall_time_s_per_episode: outcome.counters.wall_time_s / episodes as f64,
    };
    Ok((row, outcome))
}

/// Run the whole matrix with a bounded worker pool and write all artifacts
/// under the configured output directory. Per-run errors become error
/// records; the matrix continues.
pub fn run_matrix(config: &RunConfig, jobs: usize) -> Result<MatrixOutcome> {
    config.validate_global()?;
    let points = config.sweep_points();
    let out_dir = config.output.dir.clone();
    fs::create_dir_all(out_dir.join("curves"))?;
    fs::create_dir_all(out_dir.join("frames"))?;
    fs::create_dir_all(out_dir.join("plots"))?;

    type RunResult = (usize, std::result::Result<(ResultRow, TrainOutcome), String>);
    let results: Mutex<Vec<RunResult>> = Mutex::new(Vec::with_capacity(points.len()));
    let cursor = AtomicUsize::new(0);
    let workers = jobs.max(1).min(points.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let point = &points[i];
                let run = execute_run(config, point).map_err(|e| e.to_string());
                results.lock().unwrap().push((i, run));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);

    let mut outcome = MatrixOutcome::default();
    for ((i, run), point) in results.into_iter().zip(&points) {
        debug_assert_eq!(i, point.index);
        match run {
            Ok((row, train_outcome)) => {
                write_curve(&out_dir.join("curves"), point, &train_outcome)?;
                write_frames(&out_dir.join("frames"), point, &train_outcome)?;
                outcome.rows.push(row);
            }
            Err(message) => outcome.errors.push(RunError {
                label: point.label(),
                message,
            }),
        }
    }

    write_rows(&out_dir.join("results.csv"), &outcome.rows)?;
    if !outcome.errors.is_empty() {
        let mut file = fs::File::create(out_dir.join("errors.jsonl"))?;
        for err in &outcome.errors {
            writeln!(file, "{}", serde_json::to_string(err).expect("serializable"))?;
        }
    }
    write_plot_series(&out_dir.join("plots"), &outcome.rows)?;
    fs::write(out_dir.join("summary.txt"), render_summary(&summarize(&outcome.rows)))?;
    Ok(outcome)
}

fn write_curve(dir: &Path, point: &RunPoint, outcome: &TrainOutcome) -> Result<()> {
    let mut file = fs::File::create(dir.join(format!("{}.jsonl", point.label())))?;
    for cp in &outcome.curve {
        writeln!(file, "{}", serde_json::to_string(cp).expect("serializable"))?;
    }
    Ok(())
}

fn write_frames(dir: &Path, point: &RunPoint, outcome: &TrainOutcome) -> Result<()> {
    let Some(final_episode) = &outcome.final_episode else {
        return Ok(());
    };
    if final_episode.frames.is_empty() {
        return Ok(());
    }
    let mut file = fs::File::create(dir.join(format!("{}.jsonl", point.label())))?;
    for record in &final_episode.frames {
        writeln!(file, "{}", serde_json::to_string(record).expect("serializable"))?;
    }
    Ok(())
}

/// Write result rows as CSV with a header line.
pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error(path))?;
    for row in rows {
        writer.serialize(row).map_err(csv_error(path))?;
    }
    writer.flush()?;
    Ok(())
}

/// Read result rows back; inverse of [`write_rows`].
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    reader
        .deserialize()
        .map(|r| r.map_err(csv_error(path)))
        .collect()
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Aggregated view of one (scheme, duplex, rate, uavs) cell across seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub duplex: String,
    pub tx_rate_bps: f64,
    pub uavs: usize,
    pub seeds: usize,
    pub mean_weighted_age: f64,
    pub age_std: f64,
    pub mean_power_w: f64,
    pub messages_per_episode: u64,
    pub mac_ops_per_episode: f64,
    pub wall_time_s_per_episode: f64,
}

/// Collapse rows over seeds into per-configuration summaries, with the
/// seed-level dispersion of the age metric.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, u64, usize), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((
                row.scheme.clone(),
                row.duplex.clone(),
                row.tx_rate_bps.to_bits(),
                row.uavs,
            ))
            .or_default()
            .push(row);
    }
    groups
        .into_values()
        .map(|group| {
            let n = group.len() as f64;
            let mean_age = group.iter().map(|r| r.mean_weighted_age).sum::<f64>() / n;
            let var = group
                .iter()
                .map(|r| (r.mean_weighted_age - mean_age).powi(2))
                .sum::<f64>()
                / n;
            SummaryRow {
                scheme: group[0].scheme.clone(),
                duplex: group[0].duplex.clone(),
                tx_rate_bps: group[0].tx_rate_bps,
                uavs: group[0].uavs,
                seeds: group.len(),
                mean_weighted_age: mean_age,
                age_std: var.sqrt(),
                mean_power_w: group.iter().map(|r| r.mean_power_w).sum::<f64>() / n,
                messages_per_episode: group[0].messages_per_episode,
                mac_ops_per_episode: group.iter().map(|r| r.mac_ops_per_episode as f64).sum::<f64>()
                    / n,
                wall_time_s_per_episode: group
                    .iter()
                    .map(|r| r.wall_time_s_per_episode)
                    .sum::<f64>()
                    / n,
            }
        })
        .collect()
}

/// Plain-text comparison table.
pub fn render_summary(summary: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>6} {:>12} {:>5} {:>6} {:>12} {:>10} {:>10} {:>14} {:>12}\n",
        "scheme",
        "duplex",
        "rate_mbps",
        "uavs",
        "seeds",
        "mean_age",
        "age_std",
        "msgs/ep",
        "mac_ops/ep",
        "wall_s/ep"
    ));
    for row in summary {
        out.push_str(&format!(
            "{:<10} {:>6} {:>12.3} {:>5} {:>6} {:>12.4} {:>10.4} {:>10} {:>14.0} {:>12.6}\n",
            row.scheme,
            row.duplex,
            row.tx_rate_bps / 1e6,
            row.uavs,
            row.seeds,
            row.mean_weighted_age,
            row.age_std,
            row.messages_per_episode,
            row.mac_ops_per_episode,
            row.wall_time_s_per_episode
        ));
    }
    out
}

/// Two-column series files per figure analog: age versus rate for each
/// (scheme, duplex), and age versus swarm size for each (scheme, duplex).
fn write_plot_series(dir: &Path, rows: &[ResultRow]) -> Result<()> {
    let summary = summarize(rows);

    let mut by_rate: BTreeMap<(String, String), BTreeMap<u64, f64>> = BTreeMap::new();
    let mut by_uavs: BTreeMap<(String, String), BTreeMap<usize, f64>> = BTreeMap::new();
    for row in &summary {
        let key = (row.scheme.clone(), row.duplex.clone());
        by_rate
            .entry(key.clone())
            .or_default()
            .insert(row.tx_rate_bps.to_bits(), row.mean_weighted_age);
        by_uavs
            .entry(key)
            .or_default()
            .insert(row.uavs, row.mean_weighted_age);
    }

    for ((scheme, duplex), series) in &by_rate {
        if series.len() < 2 {
            continue;
        }
        let name = format!(
            "aoi_vs_rate_{}_{duplex}.dat",
            scheme.to_ascii_lowercase().replace('-', "")
        );
        let mut file = fs::File::create(dir.join(name))?;
        writeln!(file, "# tx_rate_mbps mean_weighted_age")?;
        for (&bits, &age) in series {
            writeln!(file, "{} {}", f64::from_bits(bits) / 1e6, age)?;
        }
    }
    for ((scheme, duplex), series) in &by_uavs {
        if series.len() < 2 {
            continue;
        }
        let name = format!(
            "aoi_vs_uavs_{}_{duplex}.dat",
            scheme.to_ascii_lowercase().replace('-', "")
        );
        let mut file = fs::File::create(dir.join(name))?;
        writeln!(file, "# uavs mean_weighted_age")?;
        for (&uavs, &age) in series {
            writeln!(file, "{uavs} {age}")?;
        }
    }
    Ok(())
}
