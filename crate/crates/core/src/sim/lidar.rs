//! Range finder simulation by exact grid traversal.

use std::f64::consts::PI;

use super::{Obstacle, VehicleState};
use crate::geometry::Vec2;
use crate::track::OccupancyGrid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LidarConfig {
    pub n_beams: usize,
    /// Total field of view, radians, centered on the heading.
    pub fov: f64,
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            n_beams: 10,
            fov: PI,
            max_range: 4.0,
        }
    }
}

/// Heading offset of beam `k`, from -fov/2 (rightmost) to +fov/2 (leftmost).
pub fn beam_offset(k: usize, n_beams: usize, fov: f64) -> f64 {
    -0.5 * fov + k as f64 * fov / (n_beams - 1) as f64
}

pub fn scan_lidar(
    state: &VehicleState,
    grid: &OccupancyGrid,
    obstacles: &[Obstacle],
    n_beams: usize,
    fov: f64,
    max_range: f64,
) -> Vec<f64> {
    assert!(n_beams >= 2, "lidar needs at least two beams");
    let origin = state.position();
    (0..n_beams)
        .map(|k| {
            let angle = state.psi + beam_offset(k, n_beams, fov);
            cast_ray(grid, obstacles, origin, angle, max_range)
        })
        .collect()
}

/// Distance to the first occupied cell or obstacle along a ray, capped at `max_range`.
pub fn cast_ray(
    grid: &OccupancyGrid,
    obstacles: &[Obstacle],
    origin: Vec2,
    angle: f64,
    max_range: f64,
) -> f64 {
    let dir = Vec2::from_angle(angle);
    let mut range = grid_ray(grid, origin, dir, max_range);
    for obs in obstacles {
        if let Some(t) = obs.ray_hit(origin, dir) {
            range = range.min(t);
        }
    }
    range.min(max_range)
}

/// Amanatides-Woo traversal of the cells crossed by the ray.
fn grid_ray(grid: &OccupancyGrid, origin: Vec2, dir: Vec2, max_range: f64) -> f64 {
    let res = grid.resolution();
    let g = (origin - grid.origin()) * (1.0 / res);
    let (mut col, mut row) = (g.x.floor() as i64, g.y.floor() as i64);
    if grid.is_occupied_cell(col, row) {
        return 0.0;
    }
    let axis = |pos: f64, cell: i64, d: f64| -> (i64, f64, f64) {
        if d > 0.0 {
            (1, (cell as f64 + 1.0 - pos) / d, 1.0 / d)
        } else if d < 0.0 {
            (-1, (pos - cell as f64) / -d, -1.0 / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (step_c, mut next_c, delta_c) = axis(g.x, col, dir.x);
    let (step_r, mut next_r, delta_r) = axis(g.y, row, dir.y);
    let limit = max_range / res;
    loop {
        let t = if next_c < next_r {
            col += step_c;
            let t = next_c;
            next_c += delta_c;
            t
        } else {
            row += step_r;
            let t = next_r;
            next_r += delta_r;
            t
        };
        if t > limit {
            return max_range;
        }
        if grid.is_occupied_cell(col, row) {
            return t * res;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_grid() -> OccupancyGrid {
        OccupancyGrid::free(400, 400, 0.05, Vec2::new(-10.0, -10.0))
    }

    #[test]
    fn empty_world_reads_max_range() {
        let s = VehicleState::default();
        let scan = scan_lidar(&s, &free_grid(), &[], 10, PI, 4.0);
        assert_eq!(scan, vec![4.0; 10]);
    }

    #[test]
    fn axis_aligned_wall() {
        let mut grid = free_grid();
        for r in 0..400 {
            for c in 260..400 {
                grid.set_occupied(c, r, true); // x >= 3
            }
        }
        let s = VehicleState::default();
        let scan = scan_lidar(&s, &grid, &[], 11, PI, 4.0);
        assert!((scan[5] - 3.0).abs() <= 0.05, "{}", scan[5]);
    }

    #[test]
    fn obstacle_face_ahead() {
        let s = VehicleState::default();
        let obs = [Obstacle::new(Vec2::new(2.0, 0.0), 0.6)];
        let scan = scan_lidar(&s, &free_grid(), &obs, 11, PI, 4.0);
        assert!((scan[5] - 1.7).abs() <= 0.05, "{}", scan[5]);
    }

    #[test]
    fn inside_occupied_cell_reads_zero() {
        let mut grid = free_grid();
        grid.set_occupied(200, 200, true);
        let s = VehicleState {
            x: 0.02,
            y: 0.02,
            ..Default::default()
        };
        assert!(scan_lidar(&s, &grid, &[], 3, PI, 4.0)
            .iter()
            .all(|&r| r == 0.0));
    }
}
