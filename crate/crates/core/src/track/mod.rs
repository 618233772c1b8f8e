//! Track geometry: occupancy grids, centerline extraction, the
//! minimum-curvature raceline with its speed profile, and line-relative
//! geometry used by the rewards and planners.

mod centerline;
mod grid;
mod line;
mod mincurve;
mod speed;

use std::path::Path;

pub use centerline::{
    annulus_grid, extract_centerline, rotate_grid_ccw, Centerline, CenterlineConfig,
};
pub use grid::{load_grid, OccupancyGrid};
pub use line::{project_progress, wrap_progress, LineRelation, Projection, RaceLine};
pub use mincurve::{
    curvature_objective, offset_bounds, offset_path, optimize_min_curvature,
    optimize_min_curvature_with, optimize_offsets, path_curvature, MinCurvatureConfig,
};
pub use speed::{speed_profile, SpeedLimits};

use crate::fmt::format_sig;
use crate::geometry::Vec2;
use crate::sim::VehicleState;

#[derive(Debug, thiserror::Error)]
pub enum TrackError {
    #[error("grid format error: {0}")]
    Format(String),
    #[error("grid payload truncated: expected {expected} cells, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("track topology error: {0}")]
    Topology(String),
    #[error("track too narrow at point {index}: width {width:.3} m < 2 x margin {margin:.3} m")]
    Infeasible {
        index: usize,
        width: f64,
        margin: f64,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Relation of a vehicle state to a reference line.
pub fn line_relation(state: &VehicleState, line: &RaceLine) -> LineRelation {
    line.relation(state.position(), state.psi)
}

/// Which line the rewards measure against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reference {
    CenterLine,
    MinCurvature,
}

impl Reference {
    pub fn as_str(self) -> &'static str {
        match self {
            Reference::CenterLine => "center",
            Reference::MinCurvature => "mincurve",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackConfig {
    pub centerline: CenterlineConfig,
    /// Clearance kept between the raceline and the track edge, meters.
    pub margin: f64,
    pub limits: SpeedLimits,
    pub optimizer: MinCurvatureConfig,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            centerline: CenterlineConfig::default(),
            margin: 0.4,
            limits: SpeedLimits::default(),
            optimizer: MinCurvatureConfig::default(),
        }
    }
}

/// Everything derived from one grid: centerline and both reference lines.
#[derive(Clone, Debug)]
pub struct Track {
    pub grid: OccupancyGrid,
    pub centerline: Centerline,
    /// Centerline points with their own speed profile.
    pub center_line: RaceLine,
    /// Minimum-curvature line with its speed profile.
    pub raceline: RaceLine,
}

impl Track {
    pub fn build(grid: OccupancyGrid, cfg: &TrackConfig) -> Result<Self, TrackError> {
        let centerline = extract_centerline(&grid, &cfg.centerline)?;
        let center_speeds = speed_profile(&centerline.points, &cfg.limits)?;
        let center_line = RaceLine::new(centerline.points.clone(), center_speeds)?;
        let raceline = build_raceline(&centerline, cfg)?;
        Ok(Self {
            grid,
            centerline,
            center_line,
            raceline,
        })
    }

    pub fn load(path: impl AsRef<Path>, cfg: &TrackConfig) -> Result<Self, TrackError> {
        Self::build(load_grid(path)?, cfg)
    }

    pub fn line(&self, reference: Reference) -> &RaceLine {
        match reference {
            Reference::CenterLine => &self.center_line,
            Reference::MinCurvature => &self.raceline,
        }
    }

    /// Start pose: first centerline point, facing along the tangent.
    pub fn start_pose(&self) -> (Vec2, f64) {
        (
            self.centerline.points[0],
            self.centerline.tangent(0).angle(),
        )
    }

    /// Start pose on a reference line: its first waypoint lies on the start
    /// line, facing along its first segment.
    pub fn start_pose_on(&self, reference: Reference) -> (Vec2, f64) {
        let line = self.line(reference);
        (line.waypoints[0], line.segment_heading(0))
    }
}

/// Minimum-curvature line plus speed profile for a centerline.
pub fn build_raceline(center: &Centerline, cfg: &TrackConfig) -> Result<RaceLine, TrackError> {
    let alpha = optimize_min_curvature_with(center, cfg.margin, &cfg.optimizer)?;
    let points = offset_path(&center.points, &center.normals, &alpha);
    let speeds = speed_profile(&points, &cfg.limits)?;
    RaceLine::new(points, speeds)
}

impl Centerline {
    /// CSV with header `x,y,w_left,w_right,s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,w_left,w_right,s\n");
        for i in 0..self.len() {
            let row = [
                self.points[i].x,
                self.points[i].y,
                self.w_left[i],
                self.w_right[i],
                self.s[i],
            ]
            .map(|v| format_sig(v, 9));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TrackError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("x,y,w_left,w_right,s") {
            return Err(TrackError::Format(
                "expected header `x,y,w_left,w_right,s`".into(),
            ));
        }
        let (mut pts, mut wl, mut wr) = (Vec::new(), Vec::new(), Vec::new());
        for (row, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| TrackError::Format(format!("row {row}: {e}")))?;
            if vals.len() != 5 {
                return Err(TrackError::Format(format!("row {row}: expected 5 columns")));
            }
            pts.push(Vec2::new(vals[0], vals[1]));
            wl.push(vals[2]);
            wr.push(vals[3]);
        }
        Self::from_points(pts, wl, wr)
    }
}
