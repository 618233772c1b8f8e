//! Follow-the-gap reactive planner.

use std::f64::consts::PI;

use crate::sim::{beam_offset, ActionCommand, VehicleParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapConfig {
    /// Radius masked around the nearest return, meters.
    pub bubble_radius: f64,
    /// Beams at or below this range count as blocked, meters.
    pub gap_threshold: f64,
    /// Speed at full steering lock, m/s.
    pub min_speed: f64,
    /// Speed when driving straight; the vehicle limit when `None`.
    pub max_speed: Option<f64>,
    /// Field of view of the scan, radians.
    pub fov: f64,
    pub target: GapTarget,
    /// Beams of the planner's own scan; the environment scan when `None`.
    pub beams: Option<usize>,
    /// Range limit of the planner's own scan, meters.
    pub max_range: f64,
}

/// Beam of the chosen gap the planner steers toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapTarget {
    Center,
    Farthest,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            bubble_radius: 0.6,
            gap_threshold: 2.5,
            min_speed: 1.0,
            max_speed: Some(3.0),
            fov: 0.5 * PI,
            target: GapTarget::Center,
            beams: Some(61),
            max_range: 4.0,
        }
    }
}

impl GapConfig {
    /// Plain variant on the environment scan: no range threshold, full
    /// field of view, vehicle top speed.
    pub fn basic() -> Self {
        Self {
            bubble_radius: 0.4,
            gap_threshold: 0.0,
            max_speed: None,
            fov: PI,
            beams: None,
            ..Self::default()
        }
    }
}

/// Indices `[start, end]` of the chosen free run after masking, or `None`
/// when every beam is blocked.
pub fn select_gap(scan: &[f64], cfg: &GapConfig) -> Option<(usize, usize)> {
    let n = scan.len();
    assert!(n >= 2, "follow the gap needs at least two beams");
    let (imin, rmin) = scan
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, r)| if r < best.1 { (i, r) } else { best },
        );

    let spacing = cfg.fov / (n - 1) as f64;
    let half_angle = if rmin > 0.0 {
        (cfg.bubble_radius / rmin).atan()
    } else {
        0.5 * PI
    };
    // a uniform scan has no nearest obstacle to mask
    let uniform = scan.iter().all(|&r| r == rmin);
    let reach = (half_angle / spacing).floor() as usize;
    let lo = imin.saturating_sub(reach);
    let hi = (imin + reach).min(n - 1);
    let open = |i: usize, threshold: f64| {
        (uniform || !(lo..=hi).contains(&i)) && scan[i] > threshold && scan[i] > 0.0
    };
    let free: Vec<bool> = (0..n).map(|i| open(i, cfg.gap_threshold)).collect();
    if free.iter().any(|&f| f) {
        widest_run(&free, cfg.fov)
    } else {
        // nothing clears the threshold: fall back to any unmasked return
        widest_run(&(0..n).map(|i| open(i, 0.0)).collect::<Vec<_>>(), cfg.fov)
    }
}

fn widest_run(free: &[bool], fov: f64) -> Option<(usize, usize)> {
    let n = free.len();
    let center_angle = |a: usize, b: usize| 0.5 * (beam_offset(a, n, fov) + beam_offset(b, n, fov));
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < n {
        if !free[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && free[i + 1] {
            i += 1;
        }
        let end = i;
        i += 1;
        best = match best {
            None => Some((start, end)),
            Some((bs, be)) => {
                let (w, bw) = (end - start, be - bs);
                let (c, bc) = (center_angle(start, end).abs(), center_angle(bs, be).abs());
                // later runs lie further left, so ties in width and centering keep the later run
                if w > bw || (w == bw && c <= bc) {
                    Some((start, end))
                } else {
                    Some((bs, be))
                }
            }
        };
    }
    best
}

pub fn follow_the_gap(scan: &[f64], params: &VehicleParams, cfg: &GapConfig) -> ActionCommand {
    let Some((start, end)) = select_gap(scan, cfg) else {
        return ActionCommand::default();
    };
    let n = scan.len();
    let angle = match cfg.target {
        GapTarget::Center => 0.5 * (beam_offset(start, n, cfg.fov) + beam_offset(end, n, cfg.fov)),
        GapTarget::Farthest => {
            // ties go to the beam closest to straight ahead, then the left one
            let k = (start..=end)
                .max_by(|&a, &b| {
                    scan[a].total_cmp(&scan[b]).then(
                        beam_offset(b, n, cfg.fov)
                            .abs()
                            .total_cmp(&beam_offset(a, n, cfg.fov).abs())
                            .then(a.cmp(&b)),
                    )
                })
                .expect("nonempty run");
            beam_offset(k, n, cfg.fov)
        }
    };
    let delta_ref = angle.clamp(-params.max_steer, params.max_steer);
    let top = cfg
        .max_speed
        .unwrap_or(params.max_speed)
        .min(params.max_speed);
    let floor = cfg.min_speed.min(top);
    ActionCommand {
        v_ref: top - (top - floor) * delta_ref.abs() / params.max_steer,
        delta_ref,
    }
}
