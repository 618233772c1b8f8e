use super::PlannerError;
use crate::geometry::wrap_angle;
use crate::sim::{ActionCommand, VehicleParams, VehicleState};
use crate::track::RaceLine;

/// Steers toward the line point `lookahead` meters of arc ahead of the
/// vehicle's projection; the speed is the profile speed at that point.
pub fn pure_pursuit(
    state: &VehicleState,
    line: &RaceLine,
    lookahead: f64,
    params: &VehicleParams,
) -> Result<ActionCommand, PlannerError> {
    if line.is_empty() {
        return Err(PlannerError::Parameter(
            "pure pursuit needs a nonempty line".into(),
        ));
    }
    if !(lookahead > 0.0) {
        return Err(PlannerError::Parameter(format!(
            "lookahead must be positive, got {lookahead}"
        )));
    }
    let proj = line.project(state.position());
    let (target, segment) = line.point_at(proj.s + lookahead);
    let bearing = wrap_angle((target - state.position()).angle() - state.psi);
    Ok(ActionCommand {
        v_ref: line.speeds[segment].min(params.max_speed),
        delta_ref: pursuit_steering(bearing, lookahead, params),
    })
}

/// `atan(2 L sin(alpha) / lookahead)`, clamped to the steering limit.
pub fn pursuit_steering(bearing: f64, lookahead: f64, params: &VehicleParams) -> f64 {
    (2.0 * params.wheelbase * bearing.sin() / lookahead)
        .atan()
        .clamp(-params.max_steer, params.max_steer)
}
