//! Reference lines: waypoints with a speed profile, and line-relative geometry.

use std::fs;
use std::path::Path;

use super::TrackError;
use crate::fmt::format_sig;
use crate::geometry::{project_on_segment, wrap_angle, Vec2};

/// Ordered closed-loop waypoints with per-point speed and arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct RaceLine {
    pub waypoints: Vec<Vec2>,
    pub speeds: Vec<f64>,
    pub s: Vec<f64>,
    /// Closed length: `s[last]` plus the closing segment.
    pub s_total: f64,
}

/// Orthogonal projection of a point onto a [`RaceLine`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub segment: usize,
    /// Position along the segment in [0, 1].
    pub t: f64,
    pub point: Vec2,
    /// Arc length of the projection, in [0, s_total).
    pub s: f64,
    pub distance: f64,
}

/// Position of a vehicle relative to a reference line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineRelation {
    /// Progress along the line, meters.
    pub s: f64,
    /// Unsigned cross-track distance, meters.
    pub d_c: f64,
    /// Heading error relative to the segment tangent, in (-pi, pi].
    pub theta: f64,
    pub segment_index: usize,
}

impl RaceLine {
    pub fn new(waypoints: Vec<Vec2>, speeds: Vec<f64>) -> Result<Self, TrackError> {
        if waypoints.len() < 2 || speeds.len() != waypoints.len() {
            return Err(TrackError::Parameter(format!(
                "race line needs at least 2 waypoints with one speed each (got {} and {})",
                waypoints.len(),
                speeds.len()
            )));
        }
        let (s, s_total) = super::centerline::arc_length(&waypoints);
        Ok(Self {
            waypoints,
            speeds,
            s,
            s_total,
        })
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// End points of segment `i`; the last segment closes the loop.
    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.waypoints.len();
        (self.waypoints[i], self.waypoints[(i + 1) % n])
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        let (a, b) = self.segment(i);
        a.distance(b)
    }

    pub fn segment_heading(&self, i: usize) -> f64 {
        let (a, b) = self.segment(i);
        (b - a).angle()
    }

    /// Nearest-segment projection. Equidistant segments resolve to the one
    /// with the smaller arc length.
    pub fn project(&self, p: Vec2) -> Projection {
        let mut best = Projection {
            segment: 0,
            t: 0.0,
            point: self.waypoints[0],
            s: 0.0,
            distance: f64::INFINITY,
        };
        for i in 0..self.waypoints.len() {
            let (a, b) = self.segment(i);
            let (t, q) = project_on_segment(p, a, b);
            let d = p.distance(q);
            if d < best.distance {
                best = Projection {
                    segment: i,
                    t,
                    point: q,
                    s: self.s[i] + t * a.distance(b),
                    distance: d,
                };
            }
        }
        if best.s >= self.s_total {
            best.s -= self.s_total;
        }
        best
    }

    pub fn relation(&self, position: Vec2, heading: f64) -> LineRelation {
        let proj = self.project(position);
        LineRelation {
            s: proj.s,
            d_c: proj.distance,
            theta: wrap_angle(heading - self.segment_heading(proj.segment)),
            segment_index: proj.segment,
        }
    }

    /// Point at arc length `s` (taken modulo `s_total`) and the segment containing it.
    pub fn point_at(&self, s: f64) -> (Vec2, usize) {
        let s = s.rem_euclid(self.s_total);
        // last index with self.s[i] <= s
        let i = self.s.partition_point(|&v| v <= s).saturating_sub(1);
        let len = self.segment_length(i);
        let (a, b) = self.segment(i);
        let t = if len > 0.0 {
            ((s - self.s[i]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (a + (b - a) * t, i)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,speed,s\n");
        for i in 0..self.waypoints.len() {
            let p = self.waypoints[i];
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_sig(p.x, 9),
                format_sig(p.y, 9),
                format_sig(self.speeds[i], 9),
                format_sig(self.s[i], 9)
            ));
        }
        out
    }

    /// Parses the `x,y,speed,s` CSV; arc lengths are recomputed from the points.
    pub fn from_csv(text: &str) -> Result<Self, TrackError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("x,y,speed,s") {
            return Err(TrackError::Format("expected header `x,y,speed,s`".into()));
        }
        let mut waypoints = Vec::new();
        let mut speeds = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| TrackError::Format(format!("row {row}: {e}")))?;
            if vals.len() != 4 {
                return Err(TrackError::Format(format!("row {row}: expected 4 columns")));
            }
            waypoints.push(Vec2::new(vals[0], vals[1]));
            speeds.push(vals[2]);
        }
        Self::new(waypoints, speeds)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), TrackError> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, TrackError> {
        Self::from_csv(&fs::read_to_string(path)?)
    }
}

/// Progress of `position` along `line`, in [0, s_total).
pub fn project_progress(position: Vec2, line: &RaceLine) -> f64 {
    line.project(position).s
}

/// Maps a progress difference into (-s_total/2, s_total/2].
pub fn wrap_progress(ds: f64, s_total: f64) -> f64 {
    let half = 0.5 * s_total;
    let r = (ds + half).rem_euclid(s_total) - half;
    if r == -half {
        half
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square_line(side: f64, per_side: usize) -> RaceLine {
        let mut pts = Vec::new();
        let corners = [
            Vec2::new(0.0, 0.0),
            Vec2::new(side, 0.0),
            Vec2::new(side, side),
            Vec2::new(0.0, side),
        ];
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for j in 0..per_side {
                pts.push(a + (b - a) * (j as f64 / per_side as f64));
            }
        }
        let n = pts.len();
        RaceLine::new(pts, vec![1.0; n]).unwrap()
    }

    #[test]
    fn waypoint_projects_to_its_arc_length() {
        let line = square_line(10.0, 10);
        for i in 0..line.len() {
            assert!((project_progress(line.waypoints[i], &line) - line.s[i]).abs() < 1e-12);
        }
        assert_eq!(line.s_total, 40.0);
    }

    #[test]
    fn lateral_offset_keeps_along_track_coordinate() {
        let line = square_line(10.0, 10);
        // segment 5 runs from x=5 to x=6 along y=0 and starts at s=5
        let s = project_progress(Vec2::new(5.5, 0.3), &line);
        assert!((s - 5.5).abs() < 1e-12);
    }

    #[test]
    fn relation_geometry() {
        let line = square_line(10.0, 10);
        let on = line.relation(Vec2::new(2.5, 0.0), 0.0);
        assert_eq!((on.d_c, on.theta), (0.0, 0.0));
        let back = line.relation(Vec2::new(2.5, 0.0), PI);
        assert_eq!(back.theta, PI);
        let left = line.relation(Vec2::new(2.5, 0.25), PI / 2.0);
        assert!((left.d_c - 0.25).abs() < 1e-12);
        assert!((left.theta - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn equidistant_segments_prefer_smaller_s() {
        let line = square_line(10.0, 1);
        // inside the corner at (10, 0), equally far from the first and second side
        let p = line.project(Vec2::new(9.0, 1.0));
        assert_eq!(p.segment, 0);
    }

    #[test]
    fn wrap_progress_window() {
        assert_eq!(wrap_progress(0.5, 100.0), 0.5);
        assert_eq!(wrap_progress(-99.5, 100.0), 0.5);
        assert_eq!(wrap_progress(99.5, 100.0), -0.5);
        assert_eq!(wrap_progress(50.0, 100.0), 50.0);
        assert_eq!(wrap_progress(-50.0, 100.0), 50.0);
    }

    #[test]
    fn point_at_wraps() {
        let line = square_line(10.0, 10);
        let (p, seg) = line.point_at(41.5);
        assert!((p - Vec2::new(1.5, 0.0)).norm() < 1e-12);
        assert_eq!(seg, 1);
        let (p, seg) = line.point_at(39.5);
        assert!((p - Vec2::new(0.0, 0.5)).norm() < 1e-12);
        assert_eq!(seg, 39);
    }

    #[test]
    fn csv_round_trip_keeps_nine_digits() {
        let line = RaceLine::new(
            vec![
                Vec2::new(0.123456789123, 1.0),
                Vec2::new(3.0, -2.5),
                Vec2::new(1.0, 4.0),
            ],
            vec![1.5, 2.0, 7.0],
        )
        .unwrap();
        let csv = line.to_csv();
        assert!(
            csv.starts_with("x,y,speed,s\n0.123456789,1,1.5,0\n"),
            "{csv}"
        );
        let back = RaceLine::from_csv(&csv).unwrap();
        assert_eq!(back.to_csv(), csv);
    }
}
