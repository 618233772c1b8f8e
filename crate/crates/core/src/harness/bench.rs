use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::{hex, lap_seed, AgentKind, ExperimentConfig};
use super::plot::trajectory_svg;
use super::HarnessError;
use crate::fmt::format_sig;
use crate::learner::{curve_csv, train, Mlp, TrainReport};
use crate::planners::{GapConfig, GapPlanner, ModificationPlanner, Planner, PurePursuitPlanner};
use crate::sim::{run_episode, Episode, EpisodeEnd, Obstacle};
use crate::track::Track;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Benchmark {
    /// No obstacles.
    Clear,
    /// Fresh random obstacles every lap.
    Obstacles,
}

impl Benchmark {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Benchmark::Clear),
            2 => Some(Benchmark::Obstacles),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Benchmark::Clear => 1,
            Benchmark::Obstacles => 2,
        }
    }
}

/// Aggregate over one agent's evaluation laps.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentRow {
    pub name: String,
    pub laps: usize,
    pub completed: usize,
    pub crashes: usize,
    pub timeouts: usize,
    /// Mean over completed laps only.
    pub avg_lap_time: Option<f64>,
    pub std_lap_time: Option<f64>,
}

impl AgentRow {
    pub fn from_laps(name: &str, outcomes: &[(EpisodeEnd, f64)]) -> Self {
        let times: Vec<f64> = outcomes
            .iter()
            .filter(|(end, _)| *end == EpisodeEnd::LapComplete)
            .map(|(_, t)| *t)
            .collect();
        let count = |e: EpisodeEnd| outcomes.iter().filter(|(end, _)| *end == e).count();
        let (avg, std) = if times.is_empty() {
            (None, None)
        } else {
            let n = times.len() as f64;
            let mean = times.iter().sum::<f64>() / n;
            let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
            (Some(mean), Some(var.sqrt()))
        };
        Self {
            name: name.to_string(),
            laps: outcomes.len(),
            completed: times.len(),
            crashes: count(EpisodeEnd::Crash),
            timeouts: count(EpisodeEnd::Timeout),
            avg_lap_time: avg,
            std_lap_time: std,
        }
    }

    /// Percent of laps completed.
    pub fn completion_rate(&self) -> f64 {
        if self.laps == 0 {
            0.0
        } else {
            self.completed as f64 / self.laps as f64 * 100.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub benchmark: Benchmark,
    pub digest: String,
    pub eval_seed: u64,
    pub train_seeds: Vec<u64>,
    /// Training seed and SHA-256 of each actor snapshot evaluated.
    pub snapshots: Vec<(u64, String)>,
    pub rows: Vec<AgentRow>,
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format_sig(x, digits)).unwrap_or_default()
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "agent,laps,completed,crashes,timeouts,completion_rate,avg_lap_time,std_lap_time\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.name,
                r.laps,
                r.completed,
                r.crashes,
                r.timeouts,
                format_sig(r.completion_rate(), 10),
                opt(r.avg_lap_time, 10),
                opt(r.std_lap_time, 10)
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let seeds: Vec<String> = self.train_seeds.iter().map(u64::to_string).collect();
        let mut out = format!(
            "benchmark {} ({})\nconfig digest {}\neval seed {}\ntraining seeds {}\n",
            self.benchmark.number(),
            match self.benchmark {
                Benchmark::Clear => "no obstacles",
                Benchmark::Obstacles => "random obstacles",
            },
            self.digest,
            self.eval_seed,
            seeds.join(",")
        );
        for (seed, digest) in &self.snapshots {
            out.push_str(&format!("snapshot seed {seed} sha256 {digest}\n"));
        }
        out.push('\n');
        let header = [
            "agent",
            "laps",
            "completion %",
            "crashes",
            "avg lap s",
            "std s",
        ];
        let mut table = vec![header.map(String::from).to_vec()];
        for r in &self.rows {
            table.push(vec![
                r.name.clone(),
                r.laps.to_string(),
                format!("{:.1}", r.completion_rate()),
                r.crashes.to_string(),
                r.avg_lap_time
                    .map(|t| format!("{t:.3}"))
                    .unwrap_or("-".into()),
                r.std_lap_time
                    .map(|t| format!("{t:.3}"))
                    .unwrap_or("-".into()),
            ]);
        }
        out.push_str(&align(&table));
        out
    }
}

/// Left-aligned first column, right-aligned rest.
pub(crate) fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if c == 0 {
                    format!("{v:<w$}", w = widths[c])
                } else {
                    format!("{v:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn load_track(cfg: &ExperimentConfig) -> Result<Track, HarnessError> {
    Ok(Track::load(&cfg.grid, &cfg.track)?)
}

pub fn snapshot_path(run_dir: &Path, seed: u64) -> PathBuf {
    run_dir.join(format!("train_seed{seed}")).join("actor.mlp")
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Episode log plus the obstacles it ran against, as CSV and SVG.
pub fn write_trajectory(
    dir: &Path,
    name: &str,
    track: &Track,
    cfg: &ExperimentConfig,
    episode: &Episode,
) -> Result<(), HarnessError> {
    write(&dir.join(format!("traj_{name}.csv")), &episode.log_csv())?;
    if !episode.obstacles.is_empty() {
        write(
            &dir.join(format!("traj_{name}_obstacles.csv")),
            &obstacles_csv(&episode.obstacles),
        )?;
    }
    let path: Vec<_> = episode
        .outcome
        .trajectory
        .iter()
        .map(|s| s.position())
        .collect();
    let svg = trajectory_svg(track, track.line(cfg.env.follow), &path, &episode.obstacles);
    write(&dir.join(format!("traj_{name}.svg")), &svg)
}

pub fn obstacles_csv(obstacles: &[Obstacle]) -> String {
    let mut out = String::from("x,y,side\n");
    for o in obstacles {
        let row = [o.center.x, o.center.y, o.side].map(|v| format_sig(v, 10));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Trains one actor and writes `curve.csv`, `actor.mlp` and a greedy lap
/// under `<run_dir>/train_seed<seed>/`.
pub fn run_training(
    cfg: &ExperimentConfig,
    track: &Track,
    seed: u64,
    run_dir: &Path,
) -> Result<TrainReport, HarnessError> {
    let report = train(track, &cfg.env, &cfg.reward, &cfg.td3, seed)?;
    let snap = snapshot_path(run_dir, seed);
    let dir = snap.parent().expect("snapshot has a parent").to_path_buf();
    write(&dir.join("curve.csv"), &curve_csv(&report.curve))?;
    write(&snap, &report.actor.to_text())?;

    let env = crate::sim::EnvConfig {
        obstacles: false,
        ..cfg.env.clone()
    };
    let mut planner = ModificationPlanner::new(report.actor.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(lap_seed(cfg.eval.seed, 0));
    let ep = run_episode(track, &env, &mut planner, &cfg.reward, &mut rng)?;
    write_trajectory(&dir, "greedy", track, cfg, &ep)?;
    Ok(report)
}

/// Loads an actor snapshot and returns it with the SHA-256 of its bytes.
pub fn load_snapshot(path: &Path) -> Result<(Mlp, String), HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Snapshot {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mlp = Mlp::from_text(&text).map_err(|e| HarnessError::Snapshot {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((mlp, hex(&Sha256::digest(text.as_bytes()))))
}

struct NamedAgent {
    name: String,
    planner: Box<dyn Planner>,
}

/// Evaluates every configured agent, laps in order with per-lap seeds.
/// The first lap of each agent is kept as its trajectory.
pub fn evaluate(
    cfg: &ExperimentConfig,
    track: &Track,
    benchmark: Benchmark,
    run_dir: &Path,
) -> Result<(BenchmarkReport, Vec<(String, Episode)>), HarnessError> {
    let mut agents = Vec::new();
    let mut snapshots = Vec::new();
    for kind in &cfg.eval.agents {
        match kind {
            AgentKind::PurePursuit => agents.push(NamedAgent {
                name: kind.as_str().into(),
                planner: Box::new(PurePursuitPlanner),
            }),
            AgentKind::FollowTheGap => agents.push(NamedAgent {
                name: kind.as_str().into(),
                planner: Box::new(GapPlanner::new(GapConfig::default())),
            }),
            AgentKind::Modification => {
                for &seed in &cfg.train_seeds {
                    let (actor, digest) = load_snapshot(&snapshot_path(run_dir, seed))?;
                    snapshots.push((seed, digest));
                    agents.push(NamedAgent {
                        name: format!("{}_seed{seed}", cfg.reward.variant.as_str()),
                        planner: Box::new(ModificationPlanner::new(actor)),
                    });
                }
            }
        }
    }

    let env = crate::sim::EnvConfig {
        obstacles: benchmark == Benchmark::Obstacles,
        ..cfg.env.clone()
    };
    let laps = match benchmark {
        Benchmark::Clear => cfg.eval.laps_benchmark1,
        Benchmark::Obstacles => cfg.eval.laps_benchmark2,
    };
    let mut rows = Vec::new();
    let mut trajectories = Vec::new();
    for agent in &mut agents {
        let mut outcomes = Vec::with_capacity(laps);
        for lap in 0..laps {
            let mut rng = ChaCha8Rng::seed_from_u64(lap_seed(cfg.eval.seed, lap as u64));
            let ep = run_episode(track, &env, agent.planner.as_mut(), &cfg.reward, &mut rng)?;
            outcomes.push((ep.outcome.terminal, ep.outcome.lap_time));
            if lap == 0 {
                trajectories.push((agent.name.clone(), ep));
            }
        }
        rows.push(AgentRow::from_laps(&agent.name, &outcomes));
    }
    let report = BenchmarkReport {
        benchmark,
        digest: cfg.digest.clone(),
        eval_seed: cfg.eval.seed,
        train_seeds: cfg.train_seeds.clone(),
        snapshots,
        rows,
    };
    Ok((report, trajectories))
}

/// Runs a benchmark and writes `report.txt`, `report.csv` and one
/// trajectory per agent under `<run_dir>/benchmark<n>/`.
pub fn run_benchmark(
    cfg: &ExperimentConfig,
    track: &Track,
    benchmark: Benchmark,
    run_dir: &Path,
) -> Result<BenchmarkReport, HarnessError> {
    let (report, trajectories) = evaluate(cfg, track, benchmark, run_dir)?;
    let dir = run_dir.join(format!("benchmark{}", benchmark.number()));
    write(&dir.join("report.txt"), &report.to_text())?;
    write(&dir.join("report.csv"), &report.to_csv())?;
    for (name, ep) in &trajectories {
        write_trajectory(&dir, name, track, cfg, ep)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_statistics_use_completed_laps_only() {
        let laps = [
            (EpisodeEnd::LapComplete, 10.0),
            (EpisodeEnd::Crash, 2.0),
            (EpisodeEnd::LapComplete, 12.0),
            (EpisodeEnd::Timeout, 60.0),
        ];
        let row = AgentRow::from_laps("a", &laps);
        assert_eq!(row.completed, 2);
        assert_eq!(row.crashes, 1);
        assert_eq!(row.timeouts, 1);
        assert_eq!(row.completion_rate(), 50.0);
        assert_eq!(row.avg_lap_time, Some(11.0));
        assert_eq!(row.std_lap_time, Some(1.0));
    }

    #[test]
    fn all_crashes_have_no_time() {
        let row = AgentRow::from_laps("a", &[(EpisodeEnd::Crash, 1.0)]);
        assert_eq!(row.avg_lap_time, None);
        assert_eq!(row.completion_rate(), 0.0);
    }

    #[test]
    fn aligned_table() {
        let t = align(&[
            vec!["agent".into(), "x".into()],
            vec!["pp".into(), "100.0".into()],
        ]);
        assert_eq!(t, "agent      x\npp     100.0\n");
    }
}
