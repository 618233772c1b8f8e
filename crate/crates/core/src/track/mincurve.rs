//! Minimum-curvature raceline geometry.
//!
//! Each centerline point may move along its normal by an offset `alpha`
//! inside the box `[-w_right + margin, w_left - margin]`. The objective is the
//! summed squared Menger curvature of the offset path. It is minimized by
//! sequential linearization: the curvature vector is linearized in `alpha`
//! around the current iterate, the resulting box-constrained least-squares
//! problem is solved with accelerated projected gradient, and the step is
//! accepted with a backtracking check on the true objective.

use super::{Centerline, TrackError};
use crate::geometry::{menger_curvature, menger_curvature_grad, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub struct MinCurvatureConfig {
    /// Convergence threshold on the change of the quadratic model objective.
    pub tolerance: f64,
    pub max_inner_iterations: usize,
    pub max_outer_iterations: usize,
}

impl Default for MinCurvatureConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_inner_iterations: 50_000,
            max_outer_iterations: 40,
        }
    }
}

/// Points displaced along their normals by the given offsets.
pub fn offset_path(points: &[Vec2], normals: &[Vec2], alpha: &[f64]) -> Vec<Vec2> {
    points
        .iter()
        .zip(normals)
        .zip(alpha)
        .map(|((&p, &n), &a)| p + n * a)
        .collect()
}

/// Signed Menger curvature at every point that has two neighbors. For a
/// closed path that is every point; for an open one the end points are skipped.
pub fn path_curvature(points: &[Vec2], closed: bool) -> Vec<f64> {
    let n = points.len();
    if closed {
        (0..n)
            .map(|i| menger_curvature(points[(i + n - 1) % n], points[i], points[(i + 1) % n]))
            .collect()
    } else {
        (1..n.saturating_sub(1))
            .map(|i| menger_curvature(points[i - 1], points[i], points[i + 1]))
            .collect()
    }
}

/// Summed squared discrete curvature of a path.
pub fn curvature_objective(points: &[Vec2], closed: bool) -> f64 {
    path_curvature(points, closed).iter().map(|k| k * k).sum()
}

/// Lateral offsets of the minimum-curvature line for a closed centerline.
pub fn optimize_min_curvature(center: &Centerline, margin: f64) -> Result<Vec<f64>, TrackError> {
    optimize_min_curvature_with(center, margin, &MinCurvatureConfig::default())
}

pub fn optimize_min_curvature_with(
    center: &Centerline,
    margin: f64,
    cfg: &MinCurvatureConfig,
) -> Result<Vec<f64>, TrackError> {
    let (lo, hi) = offset_bounds(&center.w_left, &center.w_right, margin)?;
    Ok(optimize_offsets(
        &center.points,
        &center.normals,
        &lo,
        &hi,
        true,
        cfg,
    ))
}

/// Per-point offset box; fails where the track is narrower than twice the margin.
pub fn offset_bounds(
    w_left: &[f64],
    w_right: &[f64],
    margin: f64,
) -> Result<(Vec<f64>, Vec<f64>), TrackError> {
    if !(margin >= 0.0) {
        return Err(TrackError::Parameter(format!(
            "margin must be non-negative, got {margin}"
        )));
    }
    let lo: Vec<f64> = w_right.iter().map(|w| -w + margin).collect();
    let hi: Vec<f64> = w_left.iter().map(|w| w - margin).collect();
    if let Some(index) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
        return Err(TrackError::Infeasible {
            index,
            width: w_left[index] + w_right[index],
            margin,
        });
    }
    Ok((lo, hi))
}

/// Box-constrained minimization of the summed squared curvature over
/// normal offsets, starting from the projection of zero onto the box.
pub fn optimize_offsets(
    points: &[Vec2],
    normals: &[Vec2],
    lo: &[f64],
    hi: &[f64],
    closed: bool,
    cfg: &MinCurvatureConfig,
) -> Vec<f64> {
    let n = points.len();
    let project = |a: &mut [f64]| {
        for i in 0..n {
            a[i] = a[i].clamp(lo[i], hi[i]);
        }
    };
    let objective = |a: &[f64]| curvature_objective(&offset_path(points, normals, a), closed);

    let mut alpha = vec![0.0; n];
    project(&mut alpha);
    let mut f = objective(&alpha);
    for _ in 0..cfg.max_outer_iterations {
        let path = offset_path(points, normals, &alpha);
        let lin = Linearization::new(&path, normals, closed);
        let target = solve_linearized(&lin, &alpha, lo, hi, cfg);

        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-4 {
            let trial: Vec<f64> = alpha
                .iter()
                .zip(&target)
                .map(|(a, t)| a + step * (t - a))
                .collect();
            let ft = objective(&trial);
            if ft < f {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                let gain = f - ft;
                alpha = trial;
                f = ft;
                if gain <= 1e-12 * f.max(1.0) {
                    break;
                }
            }
            None => break,
        }
    }
    alpha
}

/// Curvature residuals and their Jacobian with respect to the offsets.
/// Row `r` depends on the offsets of its three points `cols[r]`.
struct Linearization {
    residual: Vec<f64>,
    cols: Vec<[usize; 3]>,
    jac: Vec<[f64; 3]>,
    n: usize,
}

impl Linearization {
    fn new(path: &[Vec2], normals: &[Vec2], closed: bool) -> Self {
        let n = path.len();
        let centers: Vec<usize> = if closed {
            (0..n).collect()
        } else {
            (1..n.saturating_sub(1)).collect()
        };
        let mut residual = Vec::with_capacity(centers.len());
        let mut cols = Vec::with_capacity(centers.len());
        let mut jac = Vec::with_capacity(centers.len());
        for i in centers {
            let idx = [(i + n - 1) % n, i, (i + 1) % n];
            let (a, b, c) = (path[idx[0]], path[idx[1]], path[idx[2]]);
            residual.push(menger_curvature(a, b, c));
            let g = menger_curvature_grad(a, b, c);
            jac.push([
                g[0].dot(normals[idx[0]]),
                g[1].dot(normals[idx[1]]),
                g[2].dot(normals[idx[2]]),
            ]);
            cols.push(idx);
        }
        Self {
            residual,
            cols,
            jac,
            n,
        }
    }

    /// Upper bound on the largest eigenvalue of J^T J (||J||_1 * ||J||_inf).
    fn lipschitz_bound(&self) -> f64 {
        let mut col_sums = vec![0.0; self.n];
        let mut max_row: f64 = 0.0;
        for (c, j) in self.cols.iter().zip(&self.jac) {
            let mut row = 0.0;
            for k in 0..3 {
                col_sums[c[k]] += j[k].abs();
                row += j[k].abs();
            }
            max_row = max_row.max(row);
        }
        let max_col = col_sums.iter().copied().fold(0.0, f64::max);
        max_row * max_col
    }

    /// Model residual r0 + J (x - x0).
    fn model(&self, dx: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for ((r0, c), j) in self.residual.iter().zip(&self.cols).zip(&self.jac) {
            out.push(r0 + j[0] * dx[c[0]] + j[1] * dx[c[1]] + j[2] * dx[c[2]]);
        }
    }
}

/// FISTA with adaptive restart on the linearized least-squares problem.
fn solve_linearized(
    lin: &Linearization,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    cfg: &MinCurvatureConfig,
) -> Vec<f64> {
    let n = x0.len();
    let lip = 2.0 * lin.lipschitz_bound();
    if lip == 0.0 {
        return x0.to_vec();
    }
    let step = 1.0 / lip;
    let mut model = Vec::with_capacity(lin.residual.len());
    let mut dx = vec![0.0; n];
    let mut grad = vec![0.0; n];

    let eval = |x: &[f64], model: &mut Vec<f64>, dx: &mut Vec<f64>| -> f64 {
        for i in 0..n {
            dx[i] = x[i] - x0[i];
        }
        lin.model(dx, model);
        model.iter().map(|m| m * m).sum()
    };

    let mut x = x0.to_vec();
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut f_prev = eval(&x, &mut model, &mut dx);
    for _ in 0..cfg.max_inner_iterations {
        eval(&y, &mut model, &mut dx);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for ((m, c), j) in model.iter().zip(&lin.cols).zip(&lin.jac) {
            for k in 0..3 {
                grad[c[k]] += 2.0 * j[k] * m;
            }
        }
        let x_new: Vec<f64> = (0..n)
            .map(|i| (y[i] - step * grad[i]).clamp(lo[i], hi[i]))
            .collect();
        let f_new = eval(&x_new, &mut model, &mut dx);
        if f_new > f_prev {
            // momentum overshoot: restart from the last accepted iterate
            y.copy_from_slice(&x);
            t = 1.0;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        for i in 0..n {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
        }
        x = x_new;
        t = t_new;
        let change = f_prev - f_new;
        f_prev = f_new;
        if change < cfg.tolerance {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::centerline::loop_normals;

    #[test]
    fn straight_corridor_keeps_zero_offsets() {
        let points: Vec<Vec2> = (0..30).map(|i| Vec2::new(i as f64 * 0.2, 1.0)).collect();
        let normals = vec![Vec2::new(0.0, 1.0); 30];
        let lo = vec![-0.6; 30];
        let hi = vec![0.6; 30];
        let alpha = optimize_offsets(&points, &normals, &lo, &hi, false, &Default::default());
        assert!(alpha.iter().all(|a| a.abs() <= 1e-6), "{alpha:?}");
    }

    #[test]
    fn narrow_track_is_infeasible() {
        let err = offset_bounds(&[0.5, 0.2, 0.5], &[0.5, 0.2, 0.5], 0.25).unwrap_err();
        assert!(
            matches!(err, TrackError::Infeasible { index: 1, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn corner_apex_moves_inside() {
        // rounded square loop: straights joined by quarter circles of radius 1
        let mut pts = Vec::new();
        let side = 6.0;
        let r = 1.0;
        let centers = [
            Vec2::new(side - r, r),
            Vec2::new(side - r, side - r),
            Vec2::new(r, side - r),
            Vec2::new(r, r),
        ];
        for (k, c) in centers.iter().enumerate() {
            let start = -std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::FRAC_PI_2;
            for j in 0..8 {
                let a = start + j as f64 * std::f64::consts::FRAC_PI_2 / 8.0;
                pts.push(*c + Vec2::from_angle(a) * r);
            }
            let a_end = start + std::f64::consts::FRAC_PI_2;
            let p_end = *c + Vec2::from_angle(a_end) * r;
            let next = centers[(k + 1) % 4] + Vec2::from_angle(a_end) * r;
            for j in 0..10 {
                pts.push(p_end + (next - p_end) * (j as f64 / 10.0));
            }
        }
        let normals = loop_normals(&pts);
        let n = pts.len();
        let (lo, hi) = offset_bounds(&vec![0.8; n], &vec![0.8; n], 0.2).unwrap();
        let alpha = optimize_offsets(&pts, &normals, &lo, &hi, true, &Default::default());
        let before = curvature_objective(&pts, true);
        let after = curvature_objective(&offset_path(&pts, &normals, &alpha), true);
        assert!(after < before, "{after} !< {before}");
        // apex of the first corner (index 4) moves toward the inside (left)
        assert!(alpha[4] > 0.0, "apex offset {}", alpha[4]);
        for i in 0..n {
            assert!(alpha[i] >= lo[i] && alpha[i] <= hi[i]);
        }
    }
}
