use crate::sim::{ActionCommand, VehicleParams, VehicleState};

/// Number of observation components.
pub const OBS_DIM: usize = 14;

/// Normalized inputs of the learned policy:
/// `[v, delta, v_pf, delta_pf, scan 0..9]`, each in [-1, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Policy output in [-1, 1]; scaled by the steering limit before use.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PolicyAction(pub f64);

impl PolicyAction {
    pub fn new(a: f64) -> Self {
        Self(a.clamp(-1.0, 1.0))
    }
}

pub fn build_observation(
    state: &VehicleState,
    pf: &ActionCommand,
    scan: &[f64],
    params: &VehicleParams,
    max_range: f64,
) -> Observation {
    assert_eq!(
        scan.len(),
        OBS_DIM - 4,
        "observation expects 10 lidar beams"
    );
    let mut o = [0.0; OBS_DIM];
    o[0] = state.v / params.max_speed;
    o[1] = state.delta / params.max_steer;
    o[2] = pf.v_ref / params.max_speed;
    o[3] = pf.delta_ref / params.max_steer;
    for (dst, r) in o[4..].iter_mut().zip(scan) {
        *dst = r / max_range;
    }
    for v in &mut o {
        *v = v.clamp(-1.0, 1.0);
    }
    Observation(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_open_space() {
        let p = VehicleParams::default();
        let pf = ActionCommand {
            v_ref: 3.5,
            delta_ref: -0.2,
        };
        let o = build_observation(&VehicleState::default(), &pf, &[4.0; 10], &p, 4.0);
        assert_eq!(o.0[..4], [0.0, 0.0, 0.5, -0.5]);
        assert!(o.0[4..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn speed_scaling() {
        let p = VehicleParams::default();
        let s = VehicleState {
            v: 3.5,
            ..Default::default()
        };
        let o = build_observation(&s, &ActionCommand::default(), &[1.0; 10], &p, 4.0);
        assert_eq!(o.0[0], 0.5);
        assert_eq!(o.0[4], 0.25);
    }
}
