//! Small planar geometry helpers shared by the track, simulator and planners.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point or direction in the plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle` (radians from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotated by +90 degrees (points to the left of the direction).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Signed Menger curvature of three consecutive points (positive for a left turn).
///
/// Returns 0 when two of the points coincide.
pub fn menger_curvature(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let d = (b - a).norm() * (c - b).norm() * (c - a).norm();
    if d == 0.0 {
        return 0.0;
    }
    2.0 * (b - a).cross(c - b) / d
}

/// Gradient of [`menger_curvature`] with respect to each of the three points.
pub fn menger_curvature_grad(a: Vec2, b: Vec2, c: Vec2) -> [Vec2; 3] {
    let ab = b - a;
    let bc = c - b;
    let ac = c - a;
    let (d1, d2, d3) = (ab.norm(), bc.norm(), ac.norm());
    let den = d1 * d2 * d3;
    if den == 0.0 {
        return [Vec2::ZERO; 3];
    }
    let cr = ab.cross(bc);

    // cross = (b - a) x (c - b)
    let dc_da = Vec2::new(b.y - c.y, c.x - b.x);
    let dc_dc = Vec2::new(a.y - b.y, b.x - a.x);
    let dc_db = -(dc_da + dc_dc);

    let u1 = ab * (1.0 / d1);
    let u2 = bc * (1.0 / d2);
    let u3 = ac * (1.0 / d3);
    // derivative of den = d1 d2 d3
    let dd_da = (u1 * (-d2 * d3)) + (u3 * (-d1 * d2));
    let dd_db = (u1 * (d2 * d3)) + (u2 * (-d1 * d3));
    let dd_dc = (u2 * (d1 * d3)) + (u3 * (d1 * d2));

    let k = 2.0 / (den * den);
    let g = |dc: Vec2, dd: Vec2| (dc * den - dd * cr) * k;
    [g(dc_da, dd_da), g(dc_db, dd_db), g(dc_dc, dd_dc)]
}

/// Closest point on segment `a`-`b` to `p`, as (parameter in [0, 1], point).
pub fn project_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, Vec2) {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (0.0, a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (t, a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn menger_on_circle() {
        let r = 2.5;
        let p = |t: f64| Vec2::new(r * t.cos(), r * t.sin());
        let k = menger_curvature(p(0.0), p(0.3), p(0.7));
        assert!((k - 1.0 / r).abs() < 1e-12);
        let k = menger_curvature(p(0.7), p(0.3), p(0.0));
        assert!((k + 1.0 / r).abs() < 1e-12);
    }

    #[test]
    fn menger_gradient_matches_finite_differences() {
        let pts = [
            Vec2::new(0.1, -0.2),
            Vec2::new(1.0, 0.3),
            Vec2::new(1.7, 1.4),
        ];
        let grad = menger_curvature_grad(pts[0], pts[1], pts[2]);
        let h = 1e-6;
        for i in 0..3 {
            for axis in 0..2 {
                let mut plus = pts;
                let mut minus = pts;
                if axis == 0 {
                    plus[i].x += h;
                    minus[i].x -= h;
                } else {
                    plus[i].y += h;
                    minus[i].y -= h;
                }
                let fd = (menger_curvature(plus[0], plus[1], plus[2])
                    - menger_curvature(minus[0], minus[1], minus[2]))
                    / (2.0 * h);
                let an = if axis == 0 { grad[i].x } else { grad[i].y };
                assert!(
                    (fd - an).abs() < 1e-7,
                    "point {i} axis {axis}: {fd} vs {an}"
                );
            }
        }
    }
}
