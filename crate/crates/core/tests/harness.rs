use std::path::Path;

use racelab::harness::*;
use racelab::learner::Td3Config;
use racelab::sim::EpisodeEnd;

const ASSETS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");

fn config(agents: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        "[track]\ngrid = {ASSETS}/oval.grid\n[eval]\nagents = {agents}\nseed = 7\nlaps_benchmark1 = 3\nlaps_benchmark2 = 4\n{extra}"
    );
    ExperimentConfig::parse(&text, Path::new(".")).unwrap()
}

#[test]
fn benchmark2_is_deterministic_and_well_formed() {
    let cfg = config("pure_pursuit, fgm", "");
    let track = load_track(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = run_benchmark(&cfg, &track, Benchmark::Obstacles, dir.path()).unwrap();
    let first = std::fs::read_to_string(dir.path().join("benchmark2/report.csv")).unwrap();
    let b = run_benchmark(&cfg, &track, Benchmark::Obstacles, dir.path()).unwrap();
    let second = std::fs::read_to_string(dir.path().join("benchmark2/report.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(first, second);
    for row in &a.rows {
        assert!((0.0..=100.0).contains(&row.completion_rate()));
        assert_eq!(row.laps, 4);
    }
    let header = first.lines().next().unwrap();
    assert!(header.contains("completion_rate") && header.contains("avg_lap_time"));
    assert!(a.rows.iter().any(|r| r.name == "fgm"));
    let text = std::fs::read_to_string(dir.path().join("benchmark2/report.txt")).unwrap();
    assert!(text.contains(&cfg.digest));
    assert!(dir.path().join("benchmark2/traj_fgm.svg").exists());
}

#[test]
fn empty_agent_list_gives_empty_report() {
    let cfg = config("", "");
    let track = load_track(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_benchmark(&cfg, &track, Benchmark::Clear, dir.path()).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(report.to_csv().lines().count(), 1);
}

#[test]
fn missing_snapshot_is_reported() {
    let cfg = config("modification", "[td3]\nseeds = 4\n");
    let track = load_track(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = run_benchmark(&cfg, &track, Benchmark::Clear, dir.path()).unwrap_err();
    assert!(matches!(err, HarnessError::Snapshot { .. }), "{err}");
}

#[test]
fn evaluation_loads_trained_snapshot() {
    let mut cfg = config(
        "modification",
        "[td3]\nseeds = 1\ntotal_steps = 300\nwarmup = 100\nhidden = 16,16\n",
    );
    assert_eq!(
        cfg.td3,
        Td3Config {
            total_steps: 300,
            warmup: 100,
            hidden: vec![16, 16],
            ..Default::default()
        }
    );
    cfg.eval.laps_benchmark1 = 2;
    let track = load_track(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_training(&cfg, &track, 1, dir.path()).unwrap();
    let (_, digest) = load_snapshot(&snapshot_path(dir.path(), 1)).unwrap();
    let report = run_benchmark(&cfg, &track, Benchmark::Clear, dir.path()).unwrap();
    assert_eq!(report.snapshots, vec![(1, digest.clone())]);
    assert!(report.to_text().contains(&digest));
    assert_eq!(report.rows[0].name, "none_seed1");
}

#[test]
fn trajectory_svg_is_deterministic() {
    let cfg = config("pure_pursuit", "");
    let track = load_track(&cfg).unwrap();
    let (_, trajectories) = evaluate(&cfg, &track, Benchmark::Clear, Path::new(".")).unwrap();
    let ep = &trajectories[0].1;
    let path: Vec<_> = ep.outcome.trajectory.iter().map(|s| s.position()).collect();
    let a = trajectory_svg(&track, &track.raceline, &path, &ep.obstacles);
    let b = trajectory_svg(&track, &track.raceline, &path, &ep.obstacles);
    assert_eq!(a, b);
    assert!(a.contains("stroke=\"red\""));
}

#[test]
fn empty_path_draws_track_and_reference_only() {
    let cfg = config("", "");
    let track = load_track(&cfg).unwrap();
    let svg = trajectory_svg(&track, &track.raceline, &[], &[]);
    assert!(svg.contains("stroke-dasharray"));
    assert!(!svg.contains("stroke=\"red\""));
    assert!(svg.ends_with("</svg>\n"));
}

#[test]
fn pure_pursuit_path_length_is_close_to_raceline() {
    let cfg = config("pure_pursuit", "");
    let track = load_track(&cfg).unwrap();
    let (report, trajectories) = evaluate(&cfg, &track, Benchmark::Clear, Path::new(".")).unwrap();
    assert_eq!(report.rows[0].completion_rate(), 100.0);
    let ep = &trajectories[0].1;
    assert_eq!(ep.outcome.terminal, EpisodeEnd::LapComplete);
    let path: Vec<_> = ep.outcome.trajectory.iter().map(|s| s.position()).collect();
    let length: f64 = path.windows(2).map(|w| w[0].distance(w[1])).sum();
    let rel = (length - track.raceline.s_total).abs() / track.raceline.s_total;
    assert!(rel < 0.1, "{length} vs {}", track.raceline.s_total);
}

#[test]
fn lap_seeds_are_distinct() {
    let seeds: std::collections::HashSet<u64> = (0..1000).map(|lap| lap_seed(3, lap)).collect();
    assert_eq!(seeds.len(), 1000);
}

#[test]
fn report_summary_lists_reports() {
    let cfg = config("pure_pursuit", "");
    let track = load_track(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    assert!(summarize_dir(dir.path())
        .unwrap()
        .contains("no reports found"));
    run_benchmark(&cfg, &track, Benchmark::Clear, dir.path()).unwrap();
    assert!(summarize_dir(dir.path()).unwrap().contains("pure_pursuit"));
}
