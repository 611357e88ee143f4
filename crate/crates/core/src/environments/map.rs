//! PTSP map files.
//!
//! Both map kinds are JSON documents. A continuous map:
//!
//! ```json
//! {
//!   "width": 4.0, "height": 4.0,
//!   "start": [1.1, 1.1],
//!   "walls": [{ "x_min": 1.5, "y_min": 1.6, "x_max": 2.2, "y_max": 2.2 }],
//!   "waypoints": [[2.3, 1.1], [2.9, 2.4]],
//!   "capture_radius": 0.3,
//!   "time_limit": 300
//! }
//! ```
//!
//! A grid map lists blocked cells as inclusive cell rectangles
//! `[x_min, y_min, x_max, y_max]` and waypoints as cells:
//!
//! ```json
//! {
//!   "width": 10, "height": 10,
//!   "start": [3, 3],
//!   "walls": [[5, 0, 5, 4]],
//!   "waypoints": [[7, 3], [8, 7]],
//!   "time_limit": 100
//! }
//! ```
//!
//! `capture_radius` and `time_limit` are optional. The map border is a wall.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const DEFAULT_CAPTURE_RADIUS: f64 = 0.3;
pub const DEFAULT_CONTINUOUS_TIME_LIMIT: u32 = 300;
pub const DEFAULT_GRID_TIME_LIMIT: u32 = 100;

/// Maximum number of waypoints; visited flags are packed in a `u32`.
pub const MAX_WAYPOINTS: usize = 32;

const CONTINUOUS_DEFAULT: &str = include_str!("../../maps/ptsp-continuous.json");
const GRID_DEFAULT: &str = include_str!("../../maps/ptsp-discrete.json");

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed map at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid map: {at}: {message}")]
    Invalid { at: String, message: String },
}

fn invalid(at: impl Into<String>, message: impl Into<String>) -> MapError {
    MapError::Invalid { at: at.into(), message: message.into() }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, MapError> {
    serde_json::from_str(text).map_err(|e| MapError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, MapError> {
    fs::read_to_string(path).map_err(|source| MapError::Io { path: path.display().to_string(), source })
}

/// Axis-aligned wall rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn strictly_contains(&self, x: f64, y: f64) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }

    /// Whether the segment `a -> b` passes through the open interior.
    pub fn blocks_segment(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        // Liang-Barsky clipping against the closed rectangle.
        for (p, q) in [(-dx, a.0 - self.x_min), (dx, self.x_max - a.0), (-dy, a.1 - self.y_min), (dy, self.y_max - a.1)]
        {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t0 > t1 {
            return false;
        }
        // A segment grazing a face touches the closed rectangle only.
        let tm = 0.5 * (t0 + t1);
        self.strictly_contains(a.0 + tm * dx, a.1 + tm * dy)
    }

    /// Nearest point on the boundary to `(x, y)`, for points inside.
    pub fn nearest_face_point(&self, x: f64, y: f64) -> (f64, f64) {
        let candidates = [
            (x - self.x_min, (self.x_min, y)),
            (self.x_max - x, (self.x_max, y)),
            (y - self.y_min, (x, self.y_min)),
            (self.y_max - y, (x, self.y_max)),
        ];
        candidates.iter().min_by(|a, b| a.0.total_cmp(&b.0)).map(|c| c.1).unwrap()
    }
}

/// Map for the continuous PTSP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousMap {
    pub width: f64,
    pub height: f64,
    pub start: [f64; 2],
    #[serde(default)]
    pub walls: Vec<Rect>,
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
    #[serde(default = "default_continuous_time_limit")]
    pub time_limit: u32,
}

fn default_capture_radius() -> f64 {
    DEFAULT_CAPTURE_RADIUS
}

fn default_continuous_time_limit() -> u32 {
    DEFAULT_CONTINUOUS_TIME_LIMIT
}

fn default_grid_time_limit() -> u32 {
    DEFAULT_GRID_TIME_LIMIT
}

impl ContinuousMap {
    /// Bundled three-waypoint map.
    pub fn bundled() -> Self {
        Self::from_json(CONTINUOUS_DEFAULT).expect("bundled continuous map is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let map: Self = parse(text)?;
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        Self::from_json(&read(path)?)
    }

    pub fn in_bounds(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    /// Whether moving along `a -> b` leaves the map or enters a wall.
    pub fn segment_blocked(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        !self.in_bounds(b.0, b.1) || self.walls.iter().any(|w| w.blocks_segment(a, b))
    }

    pub fn inside_wall(&self, x: f64, y: f64) -> bool {
        self.walls.iter().any(|w| w.strictly_contains(x, y))
    }

    pub fn validate(&self) -> Result<(), MapError> {
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return Err(invalid("width/height", "map dimensions must be positive and finite"));
        }
        if !self.capture_radius.is_finite() || self.capture_radius <= 0.0 {
            return Err(invalid("capture_radius", "must be positive"));
        }
        if self.time_limit == 0 {
            return Err(invalid("time_limit", "must be at least 1"));
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !(w.x_min < w.x_max && w.y_min < w.y_max) {
                return Err(invalid(format!("walls[{i}]"), "requires x_min < x_max and y_min < y_max"));
            }
        }
        let [sx, sy] = self.start;
        if !self.in_bounds(sx, sy) {
            return Err(invalid("start", "outside the map"));
        }
        if self.inside_wall(sx, sy) {
            return Err(invalid("start", "inside a wall"));
        }
        if self.waypoints.is_empty() || self.waypoints.len() > MAX_WAYPOINTS {
            return Err(invalid("waypoints", format!("need between 1 and {MAX_WAYPOINTS} waypoints")));
        }
        for (i, &[x, y]) in self.waypoints.iter().enumerate() {
            if !self.in_bounds(x, y) {
                return Err(invalid(format!("waypoints[{i}]"), "outside the map"));
            }
            let r = self.capture_radius;
            if let Some(j) =
                self.walls.iter().position(|w| x + r > w.x_min && x - r < w.x_max && y + r > w.y_min && y - r < w.y_max)
            {
                return Err(invalid(format!("waypoints[{i}]"), format!("capture area overlaps walls[{j}]")));
            }
        }
        Ok(())
    }
}

/// Map for the grid PTSP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub width: i32,
    pub height: i32,
    pub start: [i32; 2],
    /// Inclusive cell rectangles `[x_min, y_min, x_max, y_max]`.
    #[serde(default)]
    pub walls: Vec<[i32; 4]>,
    pub waypoints: Vec<[i32; 2]>,
    #[serde(default = "default_grid_time_limit")]
    pub time_limit: u32,
}

impl GridMap {
    /// Bundled six-waypoint map.
    pub fn bundled() -> Self {
        Self::from_json(GRID_DEFAULT).expect("bundled grid map is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let map: Self = parse(text)?;
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        Self::from_json(&read(path)?)
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        (0..self.width).contains(&x) && (0..self.height).contains(&y)
    }

    /// Out-of-grid cells count as walls.
    pub fn is_wall(&self, x: i32, y: i32) -> bool {
        !self.in_bounds(x, y) || self.walls.iter().any(|w| x >= w[0] && x <= w[2] && y >= w[1] && y <= w[3])
    }

    pub fn validate(&self) -> Result<(), MapError> {
        if self.width <= 0 || self.height <= 0 {
            return Err(invalid("width/height", "grid dimensions must be positive"));
        }
        if self.time_limit == 0 {
            return Err(invalid("time_limit", "must be at least 1"));
        }
        for (i, w) in self.walls.iter().enumerate() {
            if w[0] > w[2] || w[1] > w[3] {
                return Err(invalid(format!("walls[{i}]"), "requires x_min <= x_max and y_min <= y_max"));
            }
        }
        let [sx, sy] = self.start;
        if !self.in_bounds(sx, sy) {
            return Err(invalid("start", "outside the grid"));
        }
        if self.is_wall(sx, sy) {
            return Err(invalid("start", "inside a wall"));
        }
        if self.waypoints.is_empty() || self.waypoints.len() > MAX_WAYPOINTS {
            return Err(invalid("waypoints", format!("need between 1 and {MAX_WAYPOINTS} waypoints")));
        }
        for (i, &[x, y]) in self.waypoints.iter().enumerate() {
            if !self.in_bounds(x, y) {
                return Err(invalid(format!("waypoints[{i}]"), "outside the grid"));
            }
            if self.is_wall(x, y) {
                return Err(invalid(format!("waypoints[{i}]"), "on a wall cell"));
            }
        }
        Ok(())
    }
}
