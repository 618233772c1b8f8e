use std::f64::consts::PI;

use proptest::prelude::*;
use racelab::geometry::Vec2;
use racelab::planners::{ModificationPlanner, Observation, PolicyAction, PurePursuitPlanner};
use racelab::rewards::*;
use racelab::sim::{run_episode, EnvConfig, EpisodeEnd};
use racelab::track::{LineRelation, RaceLine, Reference, Track, TrackConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ASSETS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");

fn ctx(prev: LineRelation, next: LineRelation, s_total: f64) -> StepContext {
    StepContext {
        prev,
        next,
        speed: 3.0,
        delta_ref: 0.1,
        terminal: None,
        s_total,
        track_width: 2.0,
        max_speed: 7.0,
        max_steer: 0.4,
    }
}

#[test]
fn distance_reward_telescopes_over_real_laps() {
    for name in ["oval", "porto"] {
        let track = Track::load(format!("{ASSETS}/{name}.grid"), &TrackConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ep = run_episode(
            &track,
            &EnvConfig::default(),
            &mut PurePursuitPlanner,
            &RewardConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(ep.outcome.terminal, EpisodeEnd::LapComplete);
        for reference in [Reference::CenterLine, Reference::MinCurvature] {
            let line = track.line(reference);
            let mut rels: Vec<LineRelation> = ep
                .outcome
                .trajectory
                .iter()
                .map(|s| line.relation(s.position(), s.psi))
                .collect();
            // close the loop exactly at the start pose
            let first = rels[0];
            *rels.last_mut().unwrap() = first;
            let cfg = RewardConfig::with_variant(RewardVariant::Distance);
            let sum: f64 = rels
                .windows(2)
                .map(|w| distance_reward(&ctx(w[0], w[1], line.s_total), &cfg))
                .sum();
            assert!(
                (sum - cfg.beta_distance).abs() <= 1e-9,
                "{name} {reference:?}: {sum}"
            );
        }
    }
}

#[test]
fn random_policies_stay_within_the_reward_bound() {
    let track = Track::load(format!("{ASSETS}/porto.grid"), &TrackConfig::default()).unwrap();
    let env = EnvConfig {
        obstacles: true,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for variant in [
        RewardVariant::Distance,
        RewardVariant::Cth,
        RewardVariant::MinSteer,
    ] {
        for reference in [Reference::CenterLine, Reference::MinCurvature] {
            let cfg = RewardConfig {
                variant,
                reference,
                ..Default::default()
            };
            let bound = racing_reward_bound(
                &cfg,
                env.planner_dt(),
                env.vehicle.max_speed,
                track.line(reference).s_total,
            );
            for _ in 0..10 {
                let mut noise = ChaCha8Rng::seed_from_u64(rng.random());
                let mut planner = ModificationPlanner::new(move |_: &Observation| {
                    PolicyAction::new(noise.random_range(-1.0..1.0))
                });
                let ep = run_episode(&track, &env, &mut planner, &cfg, &mut rng).unwrap();
                for t in ep.transitions.iter().filter(|t| !t.done) {
                    assert!(
                        t.reward.abs() <= bound,
                        "{variant:?}: {} > {bound}",
                        t.reward
                    );
                }
            }
        }
    }
}

#[test]
fn terminals_override_every_variant() {
    let rel = LineRelation {
        s: 1.0,
        d_c: 0.2,
        theta: 0.1,
        segment_index: 0,
    };
    for variant in [
        RewardVariant::None,
        RewardVariant::Distance,
        RewardVariant::Cth,
        RewardVariant::MinSteer,
    ] {
        let cfg = RewardConfig::with_variant(variant);
        for (terminal, expected) in [(Terminal::Crash, -1.0), (Terminal::LapComplete, 1.0)] {
            let c = StepContext {
                terminal: Some(terminal),
                ..ctx(rel, rel, 40.0)
            };
            assert_eq!(compute_reward(&c, &cfg), expected);
        }
    }
}

fn ellipse(a: f64, b: f64, n: usize, scale: f64) -> RaceLine {
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Vec2::new(scale * a * t.cos(), scale * b * t.sin())
        })
        .collect();
    RaceLine::new(pts, vec![1.0; n]).unwrap()
}

proptest! {
    #[test]
    fn rewards_are_scale_free(
        x0 in -4.0..4.0f64, y0 in -2.0..2.0f64, psi0 in -PI..PI,
        dx in -0.5..0.5f64, dy in -0.5..0.5f64, dpsi in -0.3..0.3f64,
        speed in 0.0..7.0f64, delta in -0.4..0.4f64,
    ) {
        let make = |k: f64| {
            let line = ellipse(5.0, 3.0, 120, k);
            let p0 = Vec2::new(x0, y0) * k;
            let p1 = Vec2::new(x0 + dx, y0 + dy) * k;
            StepContext {
                prev: line.relation(p0, psi0),
                next: line.relation(p1, psi0 + dpsi),
                speed: speed * k,
                delta_ref: delta * k,
                terminal: None,
                s_total: line.s_total,
                track_width: 2.0 * k,
                max_speed: 7.0 * k,
                max_steer: 0.4 * k,
            }
        };
        let (small, big) = (make(1.0), make(2.0));
        for variant in [RewardVariant::Distance, RewardVariant::Cth, RewardVariant::MinSteer] {
            let cfg = RewardConfig::with_variant(variant);
            let (a, b) = (compute_reward(&small, &cfg), compute_reward(&big, &cfg));
            prop_assert!((a - b).abs() <= 1e-9, "{:?}: {} vs {}", variant, a, b);
        }
    }

    #[test]
    fn cth_prefers_small_offsets_and_speed(
        d1 in 0.0..2.0f64, d2 in 0.0..2.0f64, v1 in 0.0..7.0f64, v2 in 0.0..7.0f64,
        theta in -1.5..1.5f64,
    ) {
        let cfg = RewardConfig::with_variant(RewardVariant::Cth);
        let at = |d_c: f64, speed: f64| {
            let rel = LineRelation { s: 0.0, d_c, theta, segment_index: 0 };
            cth_reward(&StepContext { speed, ..ctx(rel, rel, 40.0) }, &cfg)
        };
        let (dn, dx) = (d1.min(d2), d1.max(d2));
        prop_assert!(at(dn, 3.0) >= at(dx, 3.0));
        let (vn, vx) = (v1.min(v2), v1.max(v2));
        prop_assert!(at(0.5, vx) >= at(0.5, vn));
    }

    #[test]
    fn steering_reward_is_never_positive(delta in -0.4..0.4f64) {
        let rel = LineRelation { s: 0.0, d_c: 0.0, theta: 0.0, segment_index: 0 };
        let c = StepContext { delta_ref: delta, ..ctx(rel, rel, 40.0) };
        prop_assert!(steering_reward(&c, &RewardConfig::with_variant(RewardVariant::MinSteer)) <= 0.0);
    }
}
