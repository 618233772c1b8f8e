//! Minimum-time speed profile along a closed line under constant limits.

use super::mincurve::path_curvature;
use super::TrackError;
use crate::geometry::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedLimits {
    pub v_max: f64,
    /// Lateral acceleration limit, m/s^2.
    pub a_lat_max: f64,
    /// Longitudinal acceleration and braking limit, m/s^2.
    pub a_long_max: f64,
}

impl Default for SpeedLimits {
    fn default() -> Self {
        Self {
            v_max: 7.0,
            a_lat_max: 8.0,
            a_long_max: 6.0,
        }
    }
}

/// Speeds per waypoint of a closed loop: each point is capped by `v_max` and
/// the lateral limit, then forward (acceleration) and backward (braking)
/// passes run around the loop until nothing changes.
pub fn speed_profile(waypoints: &[Vec2], limits: &SpeedLimits) -> Result<Vec<f64>, TrackError> {
    let SpeedLimits {
        v_max,
        a_lat_max,
        a_long_max,
    } = *limits;
    if !(v_max > 0.0 && a_lat_max > 0.0 && a_long_max > 0.0) {
        return Err(TrackError::Parameter(format!(
            "speed limits must be positive: {limits:?}"
        )));
    }
    let n = waypoints.len();
    if n < 3 {
        return Err(TrackError::Parameter(format!(
            "speed profile needs a closed loop of at least 3 points, got {n}"
        )));
    }
    let curvature = path_curvature(waypoints, true);
    let mut v: Vec<f64> = curvature
        .iter()
        .map(|k| {
            let k = k.abs();
            if k > 0.0 {
                v_max.min((a_lat_max / k).sqrt())
            } else {
                v_max
            }
        })
        .collect();
    let ds: Vec<f64> = (0..n)
        .map(|i| waypoints[i].distance(waypoints[(i + 1) % n]))
        .collect();

    // each full pass pair can only lower speeds, so this terminates
    for _ in 0..4 * n {
        let mut changed = false;
        for k in 0..n {
            let (i, j) = (k, (k + 1) % n);
            let reach = (v[i] * v[i] + 2.0 * a_long_max * ds[i]).sqrt();
            if reach < v[j] {
                v[j] = reach;
                changed = true;
            }
        }
        for k in (0..n).rev() {
            let (i, j) = (k, (k + 1) % n);
            let reach = (v[j] * v[j] + 2.0 * a_long_max * ds[i]).sqrt();
            if reach < v[i] {
                v[i] = reach;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(v)
}
