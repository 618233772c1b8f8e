use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use racelab::harness::{
    load_track, read_log_positions, read_obstacles, run_benchmark, run_training, summarize_dir,
    trajectory_svg, Benchmark, ExperimentConfig,
};
use racelab::sim::EpisodeEnd;
use racelab::track::{
    build_raceline, curvature_objective, offset_path, Centerline, Reference, Track, TrackConfig,
};

#[derive(Parser)]
#[command(name = "racelab", version, about = "Racing reward experiments on occupancy-grid tracks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track tooling.
    Track {
        #[command(subcommand)]
        action: TrackAction,
    },
    /// Raceline tooling.
    Raceline {
        #[command(subcommand)]
        action: RacelineAction,
    },
    /// Train a steering-correction agent.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Root directory for run outputs.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Evaluate the configured agents on a benchmark.
    Eval {
        /// 1: no obstacles, 2: random obstacles.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        benchmark: u8,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Draw a trajectory log over a track as SVG.
    Plot {
        /// CSV log with `x` and `y` columns.
        log: PathBuf,
        /// Occupancy grid of the track.
        track: PathBuf,
        /// Obstacle CSV (`x,y,side`).
        #[arg(long)]
        obstacles: Option<PathBuf>,
        /// Reference line drawn dashed.
        #[arg(long, value_enum, default_value = "mincurve")]
        reference: Line,
        /// Output file; defaults to the log path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize every report and training curve below a directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum TrackAction {
    /// Extract the centerline and raceline from an occupancy grid.
    Build {
        grid: PathBuf,
        /// Output directory; defaults to the grid's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RacelineAction {
    /// Minimum-curvature raceline from a centerline CSV.
    Optimize {
        track: PathBuf,
        /// Clearance to the track edge, meters.
        #[arg(long, default_value_t = 0.4)]
        margin: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Line {
    Center,
    Mincurve,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Track {
            action: TrackAction::Build { grid, out },
        } => {
            let track = Track::load(&grid, &TrackConfig::default())
                .with_context(|| format!("building track from {}", grid.display()))?;
            let dir = out.unwrap_or_else(|| grid.parent().unwrap_or(Path::new(".")).to_path_buf());
            std::fs::create_dir_all(&dir)?;
            let stem = grid.file_stem().and_then(|s| s.to_str()).unwrap_or("track");
            let center = dir.join(format!("{stem}.centerline.csv"));
            let race = dir.join(format!("{stem}.raceline.csv"));
            write(&center, &track.centerline.to_csv())?;
            write(&race, &track.raceline.to_csv())?;
            println!(
                "centerline {} points, {:.2} m -> {}",
                track.centerline.len(),
                track.centerline.length,
                center.display()
            );
            println!(
                "raceline {:.2} m, curvature objective {:.4} -> {:.4} -> {}",
                track.raceline.s_total,
                curvature_objective(&track.centerline.points, true),
                curvature_objective(&track.raceline.waypoints, true),
                race.display()
            );
        }
        Command::Raceline {
            action: RacelineAction::Optimize { track, margin, out },
        } => {
            let text = std::fs::read_to_string(&track)
                .with_context(|| format!("reading {}", track.display()))?;
            let center = Centerline::from_csv(&text)?;
            let cfg = TrackConfig {
                margin,
                ..Default::default()
            };
            let line = build_raceline(&center, &cfg)?;
            let out = out.unwrap_or_else(|| default_raceline_path(&track));
            write(&out, &line.to_csv())?;
            let zero = offset_path(&center.points, &center.normals, &vec![0.0; center.len()]);
            println!(
                "curvature objective {:.4} -> {:.4}, length {:.2} m -> {}",
                curvature_objective(&zero, true),
                curvature_objective(&line.waypoints, true),
                line.s_total,
                out.display()
            );
        }
        Command::Train { config, seed, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let track = load_track(&cfg)?;
            let run_dir = cfg.run_dir(&out);
            let report = run_training(&cfg, &track, seed, &run_dir)?;
            let laps = report.curve.iter().rev().take(50).filter(|r| r.outcome == EpisodeEnd::LapComplete).count();
            println!("config digest {}", cfg.digest);
            println!(
                "{} episodes, {} env steps, {} gradient steps, last-50 laps completed {}",
                report.curve.len(),
                report.env_steps,
                report.gradient_steps,
                laps
            );
            println!("outputs in {}", run_dir.join(format!("train_seed{seed}")).display());
        }
        Command::Eval {
            benchmark,
            config,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let track = load_track(&cfg)?;
            let bench = Benchmark::from_number(benchmark).expect("range checked by the parser");
            let report = run_benchmark(&cfg, &track, bench, &cfg.run_dir(&out))?;
            print!("{}", report.to_text());
        }
        Command::Plot {
            log,
            track,
            obstacles,
            reference,
            out,
        } => {
            let path = read_log_positions(
                &std::fs::read_to_string(&log).with_context(|| format!("reading {}", log.display()))?,
            )?;
            let obstacles = match obstacles {
                Some(p) => read_obstacles(
                    &std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                )?,
                None => Vec::new(),
            };
            let track = Track::load(&track, &TrackConfig::default())?;
            let line = track.line(match reference {
                Line::Center => Reference::CenterLine,
                Line::Mincurve => Reference::MinCurvature,
            });
            let out = out.unwrap_or_else(|| log.with_extension("svg"));
            write(&out, &trajectory_svg(&track, line, &path, &obstacles))?;
            println!("wrote {}", out.display());
        }
        Command::Report { dir } => print!("{}", summarize_dir(&dir)?),
    }
    Ok(())
}

fn default_raceline_path(track: &Path) -> PathBuf {
    let name = track.file_name().and_then(|s| s.to_str()).unwrap_or("track.csv");
    let out = match name.strip_suffix("centerline.csv") {
        Some(prefix) => format!("{prefix}raceline.csv"),
        None => format!("{name}.raceline.csv"),
    };
    track.with_file_name(out)
}
