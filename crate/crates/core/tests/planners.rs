use std::f64::consts::PI;

use proptest::prelude::*;
use racelab::geometry::Vec2;
use racelab::planners::*;
use racelab::sim::{ActionCommand, VehicleParams, VehicleState};
use racelab::track::RaceLine;

fn ellipse_line(a: f64, b: f64, n: usize) -> RaceLine {
    let pts: Vec<Vec2> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Vec2::new(a * t.cos(), b * t.sin())
        })
        .collect();
    let speeds = (0..n).map(|i| 2.0 + (i % 7) as f64 * 0.5).collect();
    RaceLine::new(pts, speeds).unwrap()
}

fn transform(p: Vec2, angle: f64, shift: Vec2) -> Vec2 {
    p.rotate(angle) + shift
}

proptest! {
    #[test]
    fn pursuit_ignores_rigid_motion(
        x in -5.0..5.0f64, y in -3.0..3.0f64, psi in -PI..PI,
        angle in -PI..PI, dx in -20.0..20.0f64, dy in -20.0..20.0f64,
        lookahead in 0.5..3.0f64,
    ) {
        let params = VehicleParams::default();
        let line = ellipse_line(5.0, 3.0, 90);
        let state = VehicleState { x, y, psi, v: 2.0, ..Default::default() };
        let base = pure_pursuit(&state, &line, lookahead, &params).unwrap();

        let shift = Vec2::new(dx, dy);
        let moved_line = RaceLine::new(
            line.waypoints.iter().map(|p| transform(*p, angle, shift)).collect(),
            line.speeds.clone(),
        ).unwrap();
        let p = transform(state.position(), angle, shift);
        let moved = VehicleState { x: p.x, y: p.y, psi: psi + angle, ..state };
        let out = pure_pursuit(&moved, &moved_line, lookahead, &params).unwrap();
        prop_assert!((out.delta_ref - base.delta_ref).abs() <= 1e-12, "{} vs {}", out.delta_ref, base.delta_ref);
        prop_assert_eq!(out.v_ref, base.v_ref);
    }

    #[test]
    fn gap_steers_away_from_a_right_side_return(k in 0usize..4, near in 0.3..1.5f64, far in prop::collection::vec(3.0..4.0f64, 10)) {
        let mut scan = far;
        scan[k] = near;
        let cmd = follow_the_gap(&scan, &VehicleParams::default(), &GapConfig::basic());
        prop_assert!(cmd.delta_ref > 0.0, "{scan:?} -> {}", cmd.delta_ref);
    }

    #[test]
    fn gap_steers_away_from_a_left_side_return(k in 6usize..10, near in 0.3..1.5f64, far in prop::collection::vec(3.0..4.0f64, 10)) {
        let mut scan = far;
        scan[k] = near;
        let cmd = follow_the_gap(&scan, &VehicleParams::default(), &GapConfig::basic());
        prop_assert!(cmd.delta_ref < 0.0, "{scan:?} -> {}", cmd.delta_ref);
    }

    #[test]
    fn gap_command_respects_limits(scan in prop::collection::vec(0.0..4.0f64, 10)) {
        let params = VehicleParams::default();
        let cmd = follow_the_gap(&scan, &params, &GapConfig::basic());
        prop_assert!(cmd.delta_ref.abs() <= params.max_steer);
        prop_assert!(cmd.v_ref >= 0.0 && cmd.v_ref <= params.max_speed);
    }

    #[test]
    fn zero_correction_is_identity(v in 0.0..7.0f64, delta in -0.4..0.4f64) {
        let params = VehicleParams::default();
        let pf = ActionCommand { v_ref: v, delta_ref: delta };
        prop_assert_eq!(modification_plan(&pf, PolicyAction(0.0), &params), pf);
    }

    #[test]
    fn correction_stays_within_steering_limit(delta in -0.4..0.4f64, a in -1.0..1.0f64) {
        let params = VehicleParams::default();
        let pf = ActionCommand { v_ref: 3.0, delta_ref: delta };
        let out = modification_plan(&pf, PolicyAction::new(a), &params);
        prop_assert!(out.delta_ref.abs() <= params.max_steer);
        prop_assert_eq!(out.v_ref, 3.0);
    }

    #[test]
    fn observation_is_pure_and_bounded(
        v in 0.0..7.0f64, delta in -0.4..0.4f64, v_pf in -1.0..20.0f64, d_pf in -2.0..2.0f64,
        scan in prop::collection::vec(0.0..6.0f64, 10),
    ) {
        let params = VehicleParams::default();
        let state = VehicleState { v, delta, ..Default::default() };
        let pf = ActionCommand { v_ref: v_pf, delta_ref: d_pf };
        let a = build_observation(&state, &pf, &scan, &params, 4.0);
        let b = build_observation(&state, &pf, &scan, &params, 4.0);
        prop_assert!(a.0.iter().zip(b.0.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.0.iter().all(|x| (-1.0..=1.0).contains(x)));
    }
}

#[test]
fn hand_traced_scan_picks_the_left_gap() {
    let scan = [4.0, 4.0, 4.0, 0.5, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0];
    let cfg = GapConfig::basic();
    assert_eq!(select_gap(&scan, &cfg), Some((5, 9)));
    let cmd = follow_the_gap(&scan, &VehicleParams::default(), &cfg);
    // beam 7 sits at -pi/2 + 7 pi/9
    let beam7 = -PI / 2.0 + 7.0 * PI / 9.0;
    assert!((cmd.delta_ref - beam7.min(0.4)).abs() < 1e-12);
}
