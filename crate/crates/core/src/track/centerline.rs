//! Centerline extraction from an occupancy grid.
//!
//! The free-space mask is thinned to a one-pixel skeleton (Zhang-Suen), spurs
//! are pruned, the remaining loop is traced and then smoothed and resampled
//! at a fixed arc-length spacing. Widths are measured along the unit normals.

use std::collections::VecDeque;

use super::{OccupancyGrid, TrackError};
use crate::geometry::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub struct CenterlineConfig {
    /// Arc-length spacing of the output points, meters.
    pub spacing: f64,
    /// Standard deviation of the Gaussian smoothing applied to the traced skeleton, meters.
    pub smoothing: f64,
}

impl Default for CenterlineConfig {
    fn default() -> Self {
        Self {
            spacing: 0.2,
            smoothing: 0.25,
        }
    }
}

/// Closed, counter-clockwise centerline with per-point normals and widths.
#[derive(Clone, Debug, PartialEq)]
pub struct Centerline {
    pub points: Vec<Vec2>,
    /// Unit normals pointing to the left of the direction of travel.
    pub normals: Vec<Vec2>,
    pub w_left: Vec<f64>,
    pub w_right: Vec<f64>,
    pub s: Vec<f64>,
    /// Closed length, including the segment from the last point back to the first.
    pub length: f64,
}

impl Centerline {
    /// Builds a centerline from an ordered closed loop of points and widths,
    /// computing normals and arc length.
    pub fn from_points(
        points: Vec<Vec2>,
        w_left: Vec<f64>,
        w_right: Vec<f64>,
    ) -> Result<Self, TrackError> {
        let n = points.len();
        if n < 3 || w_left.len() != n || w_right.len() != n {
            return Err(TrackError::Parameter(format!(
                "centerline needs at least 3 points with matching widths (got {n})"
            )));
        }
        let normals = loop_normals(&points);
        let (s, length) = arc_length(&points);
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TrackError::Parameter(
                "centerline has repeated points".into(),
            ));
        }
        Ok(Self {
            points,
            normals,
            w_left,
            w_right,
            s,
            length,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.w_left[i] + self.w_right[i]
    }

    /// Unit tangent at point `i` (central difference over the closed loop).
    pub fn tangent(&self, i: usize) -> Vec2 {
        -self.normals[i].perp()
    }
}

/// Cumulative arc length from the first point and the closed loop length.
pub(crate) fn arc_length(points: &[Vec2]) -> (Vec<f64>, f64) {
    let mut s = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            acc += p.distance(points[i - 1]);
        }
        s.push(acc);
    }
    let closing = points
        .last()
        .zip(points.first())
        .map_or(0.0, |(a, b)| a.distance(*b));
    (s, acc + closing)
}

pub(crate) fn loop_normals(points: &[Vec2]) -> Vec<Vec2> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let t = points[(i + 1) % n] - points[(i + n - 1) % n];
            t.normalized().perp()
        })
        .collect()
}

pub fn extract_centerline(
    grid: &OccupancyGrid,
    cfg: &CenterlineConfig,
) -> Result<Centerline, TrackError> {
    if !(cfg.spacing > 0.0) || cfg.smoothing < 0.0 {
        return Err(TrackError::Parameter("spacing must be positive".into()));
    }
    check_single_loop(grid)?;

    let mut skeleton = free_mask(grid);
    thin(&mut skeleton, grid.width(), grid.height());
    prune_spurs(&mut skeleton, grid.width(), grid.height());
    let pixels = trace_loop(&skeleton, grid.width(), grid.height())?;
    let pixels = drop_staircase_corners(pixels);

    let mut path: Vec<Vec2> = pixels
        .iter()
        .map(|&(c, r)| grid.cell_center(c as i64, r as i64))
        .collect();
    if signed_area(&path) < 0.0 {
        path.reverse();
    }
    let res = grid.resolution();
    let dense = resample_closed(&path, res, 0)
        .ok_or_else(|| TrackError::Topology("degenerate skeleton".into()))?;
    let sigma = cfg.smoothing / res;
    let probe = res / 4.0;
    let max_width = (grid.width().max(grid.height()) as f64) * res;
    // thinning leaves the skeleton up to a cell or two off the medial line
    let mut smooth = gaussian_smooth_closed(&dense, sigma);
    for _ in 0..3 {
        let normals = loop_normals(&smooth);
        let centered: Vec<Vec2> = smooth
            .iter()
            .zip(&normals)
            .map(|(&p, &n)| {
                let left = free_distance(grid, p, n, probe, max_width);
                let right = free_distance(grid, p, -n, probe, max_width);
                p + n * (0.5 * (left - right))
            })
            .collect();
        smooth = gaussian_smooth_closed(&centered, sigma);
    }

    let start = start_point(&smooth);
    let points = resample_from(&smooth, start, cfg.spacing)
        .ok_or_else(|| TrackError::Topology("degenerate skeleton".into()))?;

    let normals = loop_normals(&points);
    let w_left = points
        .iter()
        .zip(&normals)
        .map(|(&p, &n)| free_distance(grid, p, n, probe, max_width))
        .collect();
    let w_right = points
        .iter()
        .zip(&normals)
        .map(|(&p, &n)| free_distance(grid, p, -n, probe, max_width))
        .collect();
    Centerline::from_points(points, w_left, w_right)
}

fn free_mask(grid: &OccupancyGrid) -> Vec<bool> {
    grid.cells().iter().map(|&c| !c).collect()
}

/// Requires exactly one 4-connected free region enclosing exactly one
/// occupied island (the grid border counts as occupied).
fn check_single_loop(grid: &OccupancyGrid) -> Result<(), TrackError> {
    let (w, h) = (grid.width(), grid.height());
    let free = free_mask(grid);
    let free_regions = count_components(&free, w, h, false);
    if free_regions != 1 {
        return Err(TrackError::Topology(format!(
            "expected one drivable region, found {free_regions}"
        )));
    }
    let (pw, ph) = (w + 2, h + 2);
    let mut occupied = vec![true; pw * ph];
    for r in 0..h {
        for c in 0..w {
            occupied[(r + 1) * pw + c + 1] = grid.is_occupied_cell(c as i64, r as i64);
        }
    }
    let walls = count_components(&occupied, pw, ph, true);
    match walls {
        2 => Ok(()),
        1 => Err(TrackError::Topology(
            "drivable region does not form a closed loop".into(),
        )),
        n => Err(TrackError::Topology(format!(
            "drivable region has {} holes, expected one",
            n - 1
        ))),
    }
}

fn count_components(mask: &[bool], w: usize, h: usize, diagonal: bool) -> usize {
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (c, r) = ((i % w) as i64, (i / w) as i64);
            for (dc, dr) in NEIGHBORS {
                if !diagonal && dc != 0 && dr != 0 {
                    continue;
                }
                let (nc, nr) = (c + dc, r + dr);
                if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                    continue;
                }
                let j = nr as usize * w + nc as usize;
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    count
}

// Clockwise from north: P2..P9 in Zhang-Suen notation.
const NEIGHBORS: [(i64, i64); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

fn at(mask: &[bool], w: usize, h: usize, c: i64, r: i64) -> bool {
    c >= 0 && r >= 0 && c < w as i64 && r < h as i64 && mask[r as usize * w + c as usize]
}

/// Zhang-Suen thinning, in place.
fn thin(mask: &mut [bool], w: usize, h: usize) {
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_clear.clear();
            for r in 0..h as i64 {
                for c in 0..w as i64 {
                    if !mask[r as usize * w + c as usize] {
                        continue;
                    }
                    let p: [bool; 8] = NEIGHBORS.map(|(dc, dr)| at(mask, w, h, c + dc, r + dr));
                    let b = p.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    // p[0]=N, p[2]=E, p[4]=S, p[6]=W
                    let ok = if pass == 0 {
                        !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                    } else {
                        !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                    };
                    if ok {
                        to_clear.push(r as usize * w + c as usize);
                    }
                }
            }
            for &i in &to_clear {
                mask[i] = false;
            }
            changed |= !to_clear.is_empty();
        }
        if !changed {
            break;
        }
    }
}

fn neighbor_count(mask: &[bool], w: usize, h: usize, i: usize) -> usize {
    let (c, r) = ((i % w) as i64, (i / w) as i64);
    NEIGHBORS
        .iter()
        .filter(|(dc, dr)| at(mask, w, h, c + dc, r + dr))
        .count()
}

/// Repeatedly removes skeleton end points until only cycles remain.
fn prune_spurs(mask: &mut [bool], w: usize, h: usize) {
    let mut queue: VecDeque<usize> = (0..mask.len())
        .filter(|&i| mask[i] && neighbor_count(mask, w, h, i) <= 1)
        .collect();
    while let Some(i) = queue.pop_front() {
        if !mask[i] || neighbor_count(mask, w, h, i) > 1 {
            continue;
        }
        mask[i] = false;
        let (c, r) = ((i % w) as i64, (i / w) as i64);
        for (dc, dr) in NEIGHBORS {
            if at(mask, w, h, c + dc, r + dr) {
                let j = (r + dr) as usize * w + (c + dc) as usize;
                if neighbor_count(mask, w, h, j) <= 1 {
                    queue.push_back(j);
                }
            }
        }
    }
}

fn trace_loop(mask: &[bool], w: usize, h: usize) -> Result<Vec<(usize, usize)>, TrackError> {
    let total = mask.iter().filter(|&&v| v).count();
    let start = (0..mask.len())
        .find(|&i| mask[i] && neighbor_count(mask, w, h, i) == 2)
        .or_else(|| mask.iter().position(|&v| v))
        .ok_or_else(|| TrackError::Topology("skeleton is empty".into()))?;
    let mut visited = vec![false; mask.len()];
    let mut path = vec![start];
    visited[start] = true;
    let mut cur = start;
    loop {
        let (c, r) = ((cur % w) as i64, (cur / w) as i64);
        // straight neighbors first so staircases are walked cell by cell
        let next = NEIGHBORS
            .iter()
            .filter(|(dc, dr)| dc * dr == 0)
            .chain(NEIGHBORS.iter().filter(|(dc, dr)| dc * dr != 0))
            .map(|(dc, dr)| (c + dc, r + dr))
            .filter(|&(nc, nr)| at(mask, w, h, nc, nr))
            .map(|(nc, nr)| nr as usize * w + nc as usize)
            .find(|&j| !visited[j]);
        match next {
            Some(j) => {
                visited[j] = true;
                path.push(j);
                cur = j;
            }
            None => break,
        }
    }
    let (sc, sr) = ((start % w) as i64, (start / w) as i64);
    let (ec, er) = ((cur % w) as i64, (cur / w) as i64);
    let closed = path.len() >= 8 && (sc - ec).abs() <= 1 && (sr - er).abs() <= 1;
    if !closed || path.len() * 2 < total {
        return Err(TrackError::Topology(format!(
            "could not trace a closed centerline ({} of {total} skeleton cells)",
            path.len()
        )));
    }
    Ok(path.into_iter().map(|i| (i % w, i / w)).collect())
}

/// Removes cells whose neighbors on the path are already adjacent, turning
/// 4-connected staircases into diagonal steps.
fn drop_staircase_corners(pixels: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let adjacent =
        |a: (usize, usize), b: (usize, usize)| a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1;
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(pixels.len());
    for p in pixels {
        while out.len() >= 2 && adjacent(out[out.len() - 2], p) {
            out.pop();
        }
        out.push(p);
    }
    while out.len() > 3 && adjacent(out[out.len() - 2], out[0]) {
        out.pop();
    }
    while out.len() > 3 && adjacent(out[out.len() - 1], out[1]) {
        out.remove(0);
    }
    out
}

fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| points[i].cross(points[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

fn centroid(points: &[Vec2]) -> Vec2 {
    let n = points.len();
    let a = signed_area(points);
    let mut c = Vec2::ZERO;
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        c += (p + q) * p.cross(q);
    }
    c * (1.0 / (6.0 * a))
}

/// Start of the loop: the lowest crossing of the vertical line through the
/// centroid, returned as (segment index, point).
fn start_point(points: &[Vec2]) -> (usize, Vec2) {
    let cx = centroid(points).x;
    let n = points.len();
    let mut best: Option<(usize, Vec2)> = None;
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        if (a.x - cx) * (b.x - cx) > 0.0 || a.x == b.x {
            continue;
        }
        let t = (cx - a.x) / (b.x - a.x);
        let p = a + (b - a) * t;
        if best.map_or(true, |(_, q)| p.y < q.y) {
            best = Some((i, p));
        }
    }
    best.unwrap_or((0, points[0]))
}

/// Even arc-length resampling of a closed polyline starting at vertex `start`.
fn resample_closed(points: &[Vec2], spacing: f64, start: usize) -> Option<Vec<Vec2>> {
    resample_from(points, (start, points[start]), spacing)
}

/// Even arc-length resampling of a closed polyline beginning at point `from`
/// on segment `from.0`; the output spacing is the closed length divided by
/// the nearest integer count.
fn resample_from(points: &[Vec2], from: (usize, Vec2), spacing: f64) -> Option<Vec<Vec2>> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    // polyline starting at `from`, going around once and ending back at it
    let mut ring = Vec::with_capacity(n + 2);
    ring.push(from.1);
    for k in 1..=n {
        ring.push(points[(from.0 + k) % n]);
    }
    ring.push(from.1);
    ring.dedup();
    let seg: Vec<f64> = ring.windows(2).map(|w| w[0].distance(w[1])).collect();
    let total: f64 = seg.iter().sum();
    let count = (total / spacing).round() as usize;
    if count < 3 {
        return None;
    }
    let step = total / count as f64;
    let mut out = Vec::with_capacity(count);
    let mut seg_idx = 0;
    let mut seg_start = 0.0;
    for k in 0..count {
        let target = k as f64 * step;
        while seg_idx + 1 < seg.len() && seg_start + seg[seg_idx] < target {
            seg_start += seg[seg_idx];
            seg_idx += 1;
        }
        let t = if seg[seg_idx] > 0.0 {
            ((target - seg_start) / seg[seg_idx]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(ring[seg_idx] + (ring[seg_idx + 1] - ring[seg_idx]) * t);
    }
    Some(out)
}

fn gaussian_smooth_closed(points: &[Vec2], sigma_samples: f64) -> Vec<Vec2> {
    if sigma_samples <= 0.0 {
        return points.to_vec();
    }
    let n = points.len() as i64;
    let half = ((3.0 * sigma_samples).ceil() as i64).min((n - 1) / 2);
    let weights: Vec<f64> = (-half..=half)
        .map(|k| (-0.5 * (k as f64 / sigma_samples).powi(2)).exp())
        .collect();
    let norm: f64 = weights.iter().sum();
    (0..n)
        .map(|i| {
            let mut acc = Vec2::ZERO;
            for (w, k) in weights.iter().zip(-half..=half) {
                acc += points[(i + k).rem_euclid(n) as usize] * *w;
            }
            acc * (1.0 / norm)
        })
        .collect()
}

/// Free distance from `p` along `dir` before the first occupied sample,
/// refined by bisection.
fn free_distance(grid: &OccupancyGrid, p: Vec2, dir: Vec2, step: f64, max: f64) -> f64 {
    if grid.is_occupied_at(p) {
        return 0.0;
    }
    let mut free = 0.0;
    let mut hit = max;
    let mut d = step;
    while d < max {
        if grid.is_occupied_at(p + dir * d) {
            hit = d;
            break;
        }
        free = d;
        d += step;
    }
    for _ in 0..20 {
        let mid = 0.5 * (free + hit);
        if grid.is_occupied_at(p + dir * mid) {
            hit = mid;
        } else {
            free = mid;
        }
    }
    free
}

/// Grid rotated by 90 degrees counter-clockwise about the world origin.
pub fn rotate_grid_ccw(grid: &OccupancyGrid) -> OccupancyGrid {
    let (w, h) = (grid.width(), grid.height());
    let res = grid.resolution();
    // old cell (c, r) -> new cell (h-1-r, c); world point rotates by +90 degrees
    let mut cells = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let (nc, nr) = (h - 1 - r, c);
            cells[nr * h + nc] = grid.is_occupied_cell(c as i64, r as i64);
        }
    }
    let o = grid.origin();
    let origin = Vec2::new(-(o.y + h as f64 * res), o.x);
    OccupancyGrid::new(h, w, res, origin, cells).expect("same cell count")
}

/// Annular track grid centered at the origin, used by tests and examples.
pub fn annulus_grid(inner: f64, outer: f64, resolution: f64) -> OccupancyGrid {
    let half = outer + 1.0;
    let n = (2.0 * half / resolution).round() as usize;
    let origin = Vec2::new(-half, -half);
    let mut grid = OccupancyGrid::free(n, n, resolution, origin);
    for r in 0..n {
        for c in 0..n {
            let d = grid.cell_center(c as i64, r as i64).norm();
            grid.set_occupied(c, r, d < inner || d > outer);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn annulus_centerline_is_mid_radius() {
        let grid = annulus_grid(2.0, 4.0, 0.05);
        let cl = extract_centerline(&grid, &CenterlineConfig::default()).unwrap();
        let res = grid.resolution();
        for i in 0..cl.len() {
            let r = cl.points[i].norm();
            eprintln!("{i} {r} {} {}", cl.w_left[i], cl.w_right[i]);
            assert!((cl.w_left[i] - 1.0).abs() <= res, "w_left {}", cl.w_left[i]);
            assert!(
                (cl.w_right[i] - 1.0).abs() <= res,
                "w_right {}",
                cl.w_right[i]
            );
            assert!((cl.normals[i].norm() - 1.0).abs() < 1e-9);
        }
        assert_eq!(cl.s[0], 0.0);
        assert!(cl.s.windows(2).all(|w| w[1] > w[0]));
        // counter-clockwise: normals point toward the center
        assert!(cl.normals[0].dot(cl.points[0]) < 0.0);
    }

    #[test]
    fn widths_stay_in_free_space() {
        let grid = annulus_grid(1.5, 3.5, 0.05);
        let cl = extract_centerline(&grid, &CenterlineConfig::default()).unwrap();
        for i in 0..cl.len() {
            let p = cl.points[i];
            let n = cl.normals[i];
            assert!(!grid.is_occupied_at(p + n * cl.w_left[i]));
            assert!(!grid.is_occupied_at(p - n * cl.w_right[i]));
        }
    }

    #[test]
    fn open_corridor_is_topology_error() {
        let mut grid = OccupancyGrid::free(100, 40, 0.05, Vec2::ZERO);
        for c in 0..100 {
            for r in 0..40 {
                grid.set_occupied(c, r, !(10..30).contains(&r));
            }
        }
        assert!(matches!(
            extract_centerline(&grid, &CenterlineConfig::default()),
            Err(TrackError::Topology(_))
        ));
    }

    #[test]
    fn two_loops_is_topology_error() {
        let a = annulus_grid(1.0, 2.0, 0.05);
        let (w, h) = (a.width(), a.height());
        let mut cells = Vec::with_capacity(2 * w * h);
        for r in 0..h {
            for c in 0..2 * w {
                cells.push(a.is_occupied_cell((c % w) as i64, r as i64));
            }
        }
        let grid = OccupancyGrid::new(2 * w, h, 0.05, a.origin(), cells).unwrap();
        assert!(matches!(
            extract_centerline(&grid, &CenterlineConfig::default()),
            Err(TrackError::Topology(_))
        ));
    }

    #[test]
    fn rotation_maps_world_points() {
        let grid = annulus_grid(1.0, 2.0, 0.1);
        let rot = rotate_grid_ccw(&grid);
        for &(x, y) in &[(1.5, 0.2), (-0.3, 1.7), (0.0, 0.0), (2.5, 2.5)] {
            let p = Vec2::new(x + 0.013, y + 0.007);
            assert_eq!(
                grid.is_occupied_at(p),
                rot.is_occupied_at(p.rotate(PI / 2.0))
            );
        }
    }
}
