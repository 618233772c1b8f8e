use std::fmt::Write;

use super::HarnessError;
use crate::geometry::Vec2;
use crate::sim::Obstacle;
use crate::track::{RaceLine, Track};

const PX_PER_M: f64 = 50.0;
const PAD: f64 = 0.5;

struct Frame {
    min: Vec2,
    max: Vec2,
}

impl Frame {
    fn map(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.min.x) * PX_PER_M, (self.max.y - p.y) * PX_PER_M)
    }

    fn polyline(&self, pts: &[Vec2], closed: bool) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        if closed {
            if let Some(p) = pts.first() {
                let (x, y) = self.map(*p);
                let _ = write!(s, " {x:.2},{y:.2}");
            }
        }
        s
    }
}

/// Track boundaries, dashed green reference, red driven path and grey
/// obstacles as an SVG document.
pub fn trajectory_svg(
    track: &Track,
    reference: &RaceLine,
    path: &[Vec2],
    obstacles: &[Obstacle],
) -> String {
    let cl = &track.centerline;
    let left: Vec<Vec2> = (0..cl.len())
        .map(|i| cl.points[i] + cl.normals[i] * cl.w_left[i])
        .collect();
    let right: Vec<Vec2> = (0..cl.len())
        .map(|i| cl.points[i] - cl.normals[i] * cl.w_right[i])
        .collect();

    let all = left
        .iter()
        .chain(&right)
        .chain(path)
        .chain(&reference.waypoints);
    let (mut min, mut max) = (
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in all {
        min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
        max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
    }
    let frame = Frame {
        min: min - Vec2::new(PAD, PAD),
        max: max + Vec2::new(PAD, PAD),
    };
    let w = (frame.max.x - frame.min.x) * PX_PER_M;
    let h = (frame.max.y - frame.min.y) * PX_PER_M;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for edge in [&left, &right] {
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            frame.polyline(edge, true)
        );
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="green" stroke-width="2" stroke-dasharray="8,6"/>"#,
        frame.polyline(&reference.waypoints, true)
    );
    for o in obstacles {
        let (x, y) = frame.map(o.center + Vec2::new(-o.half(), o.half()));
        let side = o.side * PX_PER_M;
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{side:.2}" height="{side:.2}" fill="grey"/>"#
        );
    }
    if path.len() > 1 {
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
            frame.polyline(path, false)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Positions from a log CSV with `x` and `y` columns.
pub fn read_log_positions(text: &str) -> Result<Vec<Vec2>, HarnessError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| HarnessError::Config("empty log".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| HarnessError::Config(format!("log has no `{name}` column")))
    };
    let (xi, yi) = (col("x")?, col("y")?);
    lines
        .enumerate()
        .map(|(row, line)| {
            let vals: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |i: usize| -> Result<f64, HarnessError> {
                vals.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| HarnessError::Config(format!("log row {row}: bad value")))
            };
            Ok(Vec2::new(get(xi)?, get(yi)?))
        })
        .collect()
}

/// Obstacles from a CSV with header `x,y,side`.
pub fn read_obstacles(text: &str) -> Result<Vec<Obstacle>, HarnessError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some("x,y,side") {
        return Err(HarnessError::Config(
            "obstacle file needs header `x,y,side`".into(),
        ));
    }
    lines
        .enumerate()
        .map(|(row, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|e| HarnessError::Config(format!("obstacle row {row}: {e}")))?;
            match v[..] {
                [x, y, side] if side > 0.0 => Ok(Obstacle {
                    center: Vec2::new(x, y),
                    side,
                }),
                _ => Err(HarnessError::Config(format!(
                    "obstacle row {row}: expected x,y,side"
                ))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_positions_by_header() {
        let pts = read_log_positions("t,x,y,psi\n0,1,2,0\n0.1,1.5,2.5,0\n").unwrap();
        assert_eq!(pts, vec![Vec2::new(1.0, 2.0), Vec2::new(1.5, 2.5)]);
        assert!(read_log_positions("t,psi\n0,0\n").is_err());
        assert!(read_log_positions("x,y\n1,oops\n").is_err());
    }

    #[test]
    fn obstacles_parse() {
        let obs = read_obstacles("x,y,side\n1,2,0.6\n").unwrap();
        assert_eq!(obs[0].center, Vec2::new(1.0, 2.0));
        assert!(read_obstacles("x,y\n1,2\n").is_err());
        assert!(read_obstacles("x,y,side\n1,2,-1\n").is_err());
    }
}
