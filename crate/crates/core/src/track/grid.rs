//! Binary occupancy grids and the `RLGRID 1` text format.
//!
//! The file is a header followed by `height` rows of `width` characters,
//! `#` for occupied and `.` for free. The first payload row is grid row 0,
//! the row with the smallest y.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::TrackError;
use crate::geometry::Vec2;

const MAGIC: &str = "RLGRID 1";
const HEADER_KEYS: [&str; 5] = ["width", "height", "resolution", "origin_x", "origin_y"];

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Vec2,
    /// Row-major, `true` = occupied.
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Vec2,
        cells: Vec<bool>,
    ) -> Result<Self, TrackError> {
        if width == 0 || height == 0 {
            return Err(TrackError::Format(
                "grid dimensions must be at least 1".into(),
            ));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(TrackError::Format(format!(
                "invalid resolution {resolution}"
            )));
        }
        if cells.len() != width * height {
            return Err(TrackError::Truncated {
                expected: width * height,
                found: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    /// Builds a grid from raw cell values; a cell is occupied when its value
    /// is at least half of the largest value.
    pub fn from_values(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Vec2,
        values: &[f64],
    ) -> Result<Self, TrackError> {
        let max = values.iter().copied().fold(0.0_f64, f64::max);
        let cells = values
            .iter()
            .map(|&v| max > 0.0 && v >= 0.5 * max)
            .collect();
        Self::new(width, height, resolution, origin, cells)
    }

    /// Grid of the given size with every cell free.
    pub fn free(width: usize, height: usize, resolution: f64, origin: Vec2) -> Self {
        Self::new(
            width,
            height,
            resolution,
            origin,
            vec![false; width * height],
        )
        .expect("valid dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|&&c| !c).count()
    }

    /// Occupancy of cell (col, row); anything outside the grid is occupied.
    pub fn is_occupied_cell(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return true;
        }
        self.cells[row as usize * self.width + col as usize]
    }

    pub fn set_occupied(&mut self, col: usize, row: usize, occupied: bool) {
        self.cells[row * self.width + col] = occupied;
    }

    pub fn world_to_cell(&self, p: Vec2) -> (i64, i64) {
        let g = (p - self.origin) * (1.0 / self.resolution);
        (g.x.floor() as i64, g.y.floor() as i64)
    }

    pub fn cell_center(&self, col: i64, row: i64) -> Vec2 {
        self.origin
            + Vec2::new(
                (col as f64 + 0.5) * self.resolution,
                (row as f64 + 0.5) * self.resolution,
            )
    }

    pub fn is_occupied_at(&self, p: Vec2) -> bool {
        let (c, r) = self.world_to_cell(p);
        self.is_occupied_cell(c, r)
    }

    pub fn parse(text: &str) -> Result<Self, TrackError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.trim_end() == MAGIC => {}
            other => {
                return Err(TrackError::Format(format!(
                    "expected `{MAGIC}` magic line, found {other:?}"
                )))
            }
        }
        let mut header = [None; 5];
        for _ in 0..HEADER_KEYS.len() {
            let line = lines
                .next()
                .ok_or_else(|| TrackError::Format("header ended early".into()))?;
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| TrackError::Format(format!("malformed header line `{line}`")))?;
            let slot = HEADER_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| TrackError::Format(format!("unknown header key `{key}`")))?;
            if header[slot].is_some() {
                return Err(TrackError::Format(format!("duplicate header key `{key}`")));
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| TrackError::Format(format!("bad value for `{key}`: `{value}`")))?;
            header[slot] = Some(v);
        }
        let [w, h, res, ox, oy] = header.map(|v| v.expect("all header keys present"));
        if w.fract() != 0.0 || h.fract() != 0.0 || w < 1.0 || h < 1.0 {
            return Err(TrackError::Format(format!("invalid dimensions {w}x{h}")));
        }
        let (width, height) = (w as usize, h as usize);

        let rows: Vec<&str> = lines
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        let mut cells = Vec::with_capacity(width * height);
        for row in &rows {
            for ch in row.chars() {
                match ch {
                    '#' => cells.push(true),
                    '.' => cells.push(false),
                    other => {
                        return Err(TrackError::Format(format!(
                            "unexpected cell character {other:?}"
                        )))
                    }
                }
            }
        }
        if cells.len() < width * height {
            return Err(TrackError::Truncated {
                expected: width * height,
                found: cells.len(),
            });
        }
        if rows.len() != height || rows.iter().any(|r| r.len() != width) {
            return Err(TrackError::Format(format!(
                "payload has {} cells in {} rows, expected {width}x{height}",
                cells.len(),
                rows.len()
            )));
        }
        Self::new(width, height, res, Vec2::new(ox, oy), cells)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height + 128);
        // `{:?}` gives the shortest representation that round-trips exactly.
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "width {}", self.width);
        let _ = writeln!(out, "height {}", self.height);
        let _ = writeln!(out, "resolution {:?}", self.resolution);
        let _ = writeln!(out, "origin_x {:?}", self.origin.x);
        let _ = writeln!(out, "origin_y {:?}", self.origin.y);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|&c| if c { '#' } else { '.' }));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TrackError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<OccupancyGrid, TrackError> {
    let text = fs::read_to_string(path)?;
    OccupancyGrid::parse(&text)
}
