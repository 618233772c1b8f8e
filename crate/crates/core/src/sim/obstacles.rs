//! Square obstacles: spawning along the track and collision checks.

use rand::Rng;

use super::{SimError, VehicleState};
use crate::geometry::Vec2;
use crate::track::{wrap_progress, Centerline, OccupancyGrid};

/// Axis-aligned square obstacle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obstacle {
    pub center: Vec2,
    pub side: f64,
}

impl Obstacle {
    pub fn new(center: Vec2, side: f64) -> Self {
        Self { center, side }
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        d.x.abs() <= self.half() && d.y.abs() <= self.half()
    }

    /// Distance from `p` to the square (zero inside).
    pub fn distance(&self, p: Vec2) -> f64 {
        let h = self.half();
        let d = p - self.center;
        Vec2::new((d.x.abs() - h).max(0.0), (d.y.abs() - h).max(0.0)).norm()
    }

    /// Slab test; `Some(0)` when the origin is inside.
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        if self.contains(origin) {
            return Some(0.0);
        }
        let h = self.half();
        let mut t_min = f64::NEG_INFINITY;
        let mut t_max = f64::INFINITY;
        for (o, d, c) in [
            (origin.x, dir.x, self.center.x),
            (origin.y, dir.y, self.center.y),
        ] {
            if d == 0.0 {
                if (o - c).abs() > h {
                    return None;
                }
            } else {
                let t1 = (c - h - o) / d;
                let t2 = (c + h - o) / d;
                t_min = t_min.max(t1.min(t2));
                t_max = t_max.min(t1.max(t2));
            }
        }
        (t_max >= t_min && t_min >= 0.0).then_some(t_min)
    }
}

/// True when the vehicle disc touches an occupied cell (or leaves the grid)
/// or overlaps an obstacle.
pub fn check_collision(
    state: &VehicleState,
    grid: &OccupancyGrid,
    obstacles: &[Obstacle],
    radius: f64,
) -> bool {
    let p = state.position();
    if obstacles.iter().any(|o| o.distance(p) < radius) {
        return true;
    }
    let res = grid.resolution();
    let (c0, r0) = grid.world_to_cell(p - Vec2::new(radius, radius));
    let (c1, r1) = grid.world_to_cell(p + Vec2::new(radius, radius));
    for r in r0..=r1 {
        for c in c0..=c1 {
            if !grid.is_occupied_cell(c, r) {
                continue;
            }
            let center = grid.cell_center(c, r);
            let d = p - center;
            let h = 0.5 * res;
            let gap = Vec2::new((d.x.abs() - h).max(0.0), (d.y.abs() - h).max(0.0));
            if gap.norm() < radius {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpawnRules {
    pub side: f64,
    pub min_count: usize,
    pub max_count: usize,
    /// Minimum arc-length separation between obstacles, meters.
    pub min_separation: f64,
    /// Minimum arc-length distance from the start line, meters.
    pub start_clearance: f64,
    /// Free lateral gap that must remain on at least one side, meters.
    pub min_gap: f64,
    pub max_attempts: usize,
}

impl Default for SpawnRules {
    fn default() -> Self {
        Self {
            side: 0.6,
            min_count: 3,
            max_count: 4,
            min_separation: 2.0,
            start_clearance: 1.0,
            min_gap: 0.5,
            max_attempts: 1000,
        }
    }
}

/// Obstacle together with where it was placed along the centerline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacedObstacle {
    pub obstacle: Obstacle,
    pub s: f64,
    pub index: usize,
}

pub fn spawn_obstacles<R: Rng + ?Sized>(
    rng: &mut R,
    center: &Centerline,
    rules: &SpawnRules,
) -> Result<Vec<Obstacle>, SimError> {
    Ok(spawn_placed(rng, center, rules)?
        .into_iter()
        .map(|p| p.obstacle)
        .collect())
}

pub fn spawn_placed<R: Rng + ?Sized>(
    rng: &mut R,
    center: &Centerline,
    rules: &SpawnRules,
) -> Result<Vec<PlacedObstacle>, SimError> {
    if rules.min_count > rules.max_count || !(rules.side > 0.0) {
        return Err(SimError::Config(format!("invalid spawn rules {rules:?}")));
    }
    let count = rng.random_range(rules.min_count..=rules.max_count);
    let total = center.length;
    let mut placed: Vec<PlacedObstacle> = Vec::with_capacity(count);
    let mut attempts = 0;
    while placed.len() < count {
        if attempts >= rules.max_attempts {
            return Err(SimError::Spawn {
                placed: placed.len(),
                wanted: count,
                attempts,
            });
        }
        attempts += 1;
        let index = rng.random_range(0..center.len());
        let fraction: f64 = rng.random_range(-1.0..=1.0);
        let s = center.s[index];
        if wrap_progress(s, total).abs() < rules.start_clearance {
            continue;
        }
        if placed
            .iter()
            .any(|p| wrap_progress(p.s - s, total).abs() < rules.min_separation)
        {
            continue;
        }
        let n = center.normals[index];
        let offset = if fraction >= 0.0 {
            fraction * center.w_left[index]
        } else {
            fraction * center.w_right[index]
        };
        // half extent of the axis-aligned square along the normal
        let extent = 0.5 * rules.side * (n.x.abs() + n.y.abs());
        let gap_left = center.w_left[index] - (offset + extent);
        let gap_right = center.w_right[index] + offset - extent;
        if gap_left.max(gap_right) < rules.min_gap {
            continue;
        }
        placed.push(PlacedObstacle {
            obstacle: Obstacle::new(center.points[index] + n * offset, rules.side),
            s,
            index,
        });
    }
    Ok(placed)
}
