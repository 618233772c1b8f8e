use crate::geometry::{wrap_angle, Vec2};

use super::SimError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleParams {
    pub wheelbase: f64,
    pub max_steer: f64,
    pub max_speed: f64,
    pub max_steer_rate: f64,
    pub max_accel: f64,
    /// Speed actuator gain, 1/s.
    pub k_v: f64,
    /// Steering actuator gain, 1/s.
    pub k_delta: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.33,
            max_steer: 0.4,
            max_speed: 7.0,
            max_steer_rate: 3.2,
            max_accel: 7.0,
            k_v: 10.0,
            k_delta: 10.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            ("wheelbase", self.wheelbase),
            ("max_steer", self.max_steer),
            ("max_speed", self.max_speed),
            ("max_steer_rate", self.max_steer_rate),
            ("max_accel", self.max_accel),
            ("k_v", self.k_v),
            ("k_delta", self.k_delta),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!(
                    "vehicle {name} must be positive, got {v}"
                )));
            }
        }
        if self.max_steer >= std::f64::consts::FRAC_PI_2 {
            return Err(SimError::Config(
                "vehicle max_steer must be below pi/2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in (-pi, pi].
    pub psi: f64,
    pub v: f64,
    pub delta: f64,
    /// Elapsed time, seconds.
    pub t: f64,
}

impl VehicleState {
    pub fn at_rest(position: Vec2, psi: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            psi: wrap_angle(psi),
            ..Default::default()
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Speed and steering references sent to the actuators.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ActionCommand {
    pub v_ref: f64,
    pub delta_ref: f64,
}

impl ActionCommand {
    pub fn clamped(self, params: &VehicleParams) -> Self {
        Self {
            v_ref: self.v_ref.clamp(0.0, params.max_speed),
            delta_ref: self.delta_ref.clamp(-params.max_steer, params.max_steer),
        }
    }
}

/// One physics step: proportional actuators with rate and acceleration
/// limits, then an explicit kinematic bicycle update.
pub fn step_dynamics(
    state: &VehicleState,
    cmd: &ActionCommand,
    params: &VehicleParams,
    dt: f64,
) -> VehicleState {
    let cmd = cmd.clamped(params);

    let steer_rate = (params.k_delta * (cmd.delta_ref - state.delta))
        .clamp(-params.max_steer_rate, params.max_steer_rate);
    let delta = (state.delta + steer_rate * dt).clamp(-params.max_steer, params.max_steer);
    let accel = (params.k_v * (cmd.v_ref - state.v)).clamp(-params.max_accel, params.max_accel);
    let v = (state.v + accel * dt).clamp(0.0, params.max_speed);

    let (sin, cos) = state.psi.sin_cos();
    let next = VehicleState {
        x: state.x + v * cos * dt,
        y: state.y + v * sin * dt,
        psi: wrap_angle(state.psi + v * delta.tan() / params.wheelbase * dt),
        v,
        delta,
        t: state.t + dt,
    };
    debug_assert!(next.delta.abs() <= params.max_steer);
    debug_assert!((0.0..=params.max_speed).contains(&next.v));
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_step_is_exact() {
        let p = VehicleParams::default();
        let s = VehicleState {
            v: 1.0,
            psi: 0.3,
            ..Default::default()
        };
        let cmd = ActionCommand {
            v_ref: 1.0,
            delta_ref: 0.0,
        };
        let n = step_dynamics(&s, &cmd, &p, 0.01);
        assert!((n.position().distance(s.position()) - 0.01).abs() < 1e-12);
        assert_eq!(n.psi, 0.3);
        assert_eq!(n.v, 1.0);
    }

    #[test]
    fn speed_decays_toward_zero() {
        let p = VehicleParams {
            k_v: 2.0,
            ..Default::default()
        };
        let mut s = VehicleState {
            v: 1.0,
            ..Default::default()
        };
        let cmd = ActionCommand::default();
        for _ in 0..200 {
            let n = step_dynamics(&s, &cmd, &p, 0.01);
            assert!(n.v < s.v);
            s = n;
        }
        assert!(s.v < 0.05);
    }

    #[test]
    fn steering_respects_rate_limit_and_clamp() {
        let p = VehicleParams::default();
        let s = VehicleState::default();
        let cmd = ActionCommand {
            v_ref: 0.0,
            delta_ref: 5.0,
        };
        let n = step_dynamics(&s, &cmd, &p, 0.01);
        assert!((n.delta - p.max_steer_rate * 0.01).abs() < 1e-15);
        let mut s = n;
        for _ in 0..100 {
            s = step_dynamics(&s, &cmd, &p, 0.01);
        }
        assert!(s.delta <= p.max_steer && s.delta > p.max_steer - 1e-4);
    }
}
