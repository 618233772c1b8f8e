//! Experiment orchestration: config files, training runs, the two
//! benchmarks, and plain-text, CSV and SVG outputs.

mod bench;
mod config;
mod plot;

pub use bench::{
    evaluate, load_snapshot, load_track, obstacles_csv, run_benchmark, run_training, snapshot_path,
    write_trajectory, AgentRow, Benchmark, BenchmarkReport,
};
pub use config::{hex, lap_seed, AgentKind, EvalConfig, ExperimentConfig};
pub use plot::{read_log_positions, read_obstacles, trajectory_svg};

use std::path::{Path, PathBuf};

use crate::config::ConfigError;
use crate::learner::LearnerError;
use crate::sim::SimError;
use crate::track::TrackError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ConfigError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("cannot load actor snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

fn collect_files(dir: &Path, name: &str, out: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, name, out)?;
        } else if p.file_name().is_some_and(|f| f == name) {
            out.push(p);
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Summary of every `report.csv` and `curve.csv` below `dir`.
pub fn summarize_dir(dir: &Path) -> Result<String, HarnessError> {
    let mut reports = Vec::new();
    let mut curves = Vec::new();
    collect_files(dir, "report.csv", &mut reports)?;
    collect_files(dir, "curve.csv", &mut curves)?;
    let rel = |p: &Path| p.strip_prefix(dir).unwrap_or(p).display().to_string();

    let mut out = String::new();
    for path in &reports {
        out.push_str(&format!("== {}\n", rel(path)));
        let rows: Vec<Vec<String>> = read(path)?
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        out.push_str(&bench::align(&rows));
        out.push('\n');
    }
    if !curves.is_empty() {
        let mut table = vec![[
            "curve",
            "episodes",
            "steps",
            "last50 completion %",
            "first quarter",
            "last quarter",
        ]
        .map(String::from)
        .to_vec()];
        for path in &curves {
            table.push(curve_summary(&rel(path), &read(path)?)?);
        }
        out.push_str(&bench::align(&table));
    }
    if out.is_empty() {
        out.push_str("no reports found\n");
    }
    Ok(out)
}

fn curve_summary(name: &str, text: &str) -> Result<Vec<String>, HarnessError> {
    let mut rewards = Vec::new();
    let mut outcomes = Vec::new();
    let mut steps = String::from("0");
    for (i, line) in text.lines().skip(1).filter(|l| !l.is_empty()).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(HarnessError::Config(format!(
                "{name} row {i}: expected 5 columns"
            )));
        }
        rewards.push(
            f[2].parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("{name} row {i}: {e}")))?,
        );
        outcomes.push(f[4] == "lap");
        steps = f[1].to_string();
    }
    let n = rewards.len();
    let mean = |s: &[f64]| {
        if s.is_empty() {
            "-".to_string()
        } else {
            format!("{:.3}", s.iter().sum::<f64>() / s.len() as f64)
        }
    };
    let tail = &outcomes[n.saturating_sub(50)..];
    let completion = if tail.is_empty() {
        "-".into()
    } else {
        format!(
            "{:.1}",
            tail.iter().filter(|&&c| c).count() as f64 / tail.len() as f64 * 100.0
        )
    };
    Ok(vec![
        name.to_string(),
        n.to_string(),
        steps,
        completion,
        mean(&rewards[..n / 4]),
        mean(&rewards[n - n / 4..]),
    ])
}
