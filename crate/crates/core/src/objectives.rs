//! The four path costs and their weighted-sum scalarization.
//!
//! Each cost is normalized to `[0, 1]` when feasible and is `+inf` when the
//! path violates the corresponding hard constraint:
//!
//! * `f1` length: `1 - chord / total_length`; `inf` if a segment is shorter than `r_min`.
//! * `f2` collision: mean over segment/obstacle pairs of the danger-band
//!   penalty; `inf` inside the collision distance `D + R_k`.
//! * `f3` altitude: mean over waypoints of the normalized deviation from the
//!   band center; `inf` outside `[h_min, h_max]` or off the map.
//! * `f4` smoothness: mean turning angle at interior joints over `pi`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_segment_distance_xy, Vec3};
use crate::scenario::Scenario;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("a path needs at least 3 waypoints, got {0}")]
    TooShort(usize),
    #[error("waypoint #{0} is not finite")]
    NonFinite(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("zero-length vector")]
    ZeroLength,
}

/// Ordered waypoints from start (first) to goal (last).
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPath {
    waypoints: Vec<Vec3>,
}

impl CartesianPath {
    pub fn new(waypoints: Vec<Vec3>) -> Result<Self, PathError> {
        if waypoints.len() < 3 {
            return Err(PathError::TooShort(waypoints.len()));
        }
        if let Some(i) = waypoints.iter().position(|p| !p.is_finite()) {
            return Err(PathError::NonFinite(i));
        }
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[Vec3] {
        &self.waypoints
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Parse whitespace-separated `x y z` lines. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, PathError> {
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let values: Result<Vec<f64>, _> = content.split_whitespace().map(str::parse).collect();
            let values = values.map_err(|_| PathError::Parse { line, message: format!("non-numeric value in `{content}`") })?;
            if values.len() != 3 {
                return Err(PathError::Parse { line, message: format!("expected 3 values, found {}", values.len()) });
            }
            points.push(Vec3::new(values[0], values[1], values[2]));
        }
        Self::new(points)
    }

    pub fn to_text(&self) -> String {
        self.waypoints.iter().map(|p| format!("{} {} {}\n", p.x, p.y, p.z)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector(pub [f64; 4]);

impl ObjectiveVector {
    pub const INFEASIBLE: ObjectiveVector = ObjectiveVector([f64::INFINITY; 4]);

    pub fn new(f1: f64, f2: f64, f3: f64, f4: f64) -> Self {
        Self([f1, f2, f3, f4])
    }

    pub fn f1(&self) -> f64 {
        self.0[0]
    }
    pub fn f2(&self) -> f64 {
        self.0[1]
    }
    pub fn f3(&self) -> f64 {
        self.0[2]
    }
    pub fn f4(&self) -> f64 {
        self.0[3]
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn is_feasible(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector([f64; 4]);

impl WeightVector {
    /// Equal unit weights; the costs are already normalized.
    pub const UNIT: WeightVector = WeightVector([1.0; 4]);

    pub fn new(weights: [f64; 4]) -> Option<Self> {
        let ok = weights.iter().all(|w| *w >= 0.0 && w.is_finite()) && weights.iter().any(|w| *w > 0.0);
        ok.then_some(Self(weights))
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.0
    }
}

impl Default for WeightVector {
    fn default() -> Self {
        Self::UNIT
    }
}

pub fn path_length_cost(path: &CartesianPath, r_min: f64) -> f64 {
    let mut total = 0.0;
    for (a, b) in path.segments() {
        let len = a.distance(b);
        if len < r_min {
            return f64::INFINITY;
        }
        total += len;
    }
    let w = path.waypoints();
    let chord = w[0].distance(w[w.len() - 1]);
    1.0 - chord / total
}

/// Danger-band penalty for one segment at planar distance `d` from an obstacle.
pub fn segment_threat(d: f64, drone_size: f64, radius: f64, safe_distance: f64) -> f64 {
    let collide = drone_size + radius;
    if d >= collide + safe_distance {
        0.0
    } else if d > collide {
        1.0 - (d - collide) / safe_distance
    } else {
        f64::INFINITY
    }
}

pub fn collision_cost(path: &CartesianPath, scenario: &Scenario) -> f64 {
    if scenario.obstacles.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for (a, b) in path.segments() {
        for o in &scenario.obstacles {
            let d = point_segment_distance_xy(o.center_x, o.center_y, a, b);
            sum += segment_threat(d, scenario.drone_size, o.radius, scenario.safe_distance);
        }
    }
    sum / (scenario.obstacles.len() * (path.len() - 1)) as f64
}

pub fn altitude_cost(path: &CartesianPath, scenario: &Scenario) -> f64 {
    let (h_min, h_max) = (scenario.h_min, scenario.h_max);
    let h_mean = scenario.h_mean();
    let mut sum = 0.0;
    for p in path.waypoints() {
        let Ok(ground) = scenario.terrain.elevation_at(p.x, p.y) else {
            return f64::INFINITY;
        };
        let h = p.z - ground;
        if !(h_min..=h_max).contains(&h) {
            return f64::INFINITY;
        }
        sum += 2.0 * (h - h_mean).abs() / (h_max - h_min);
    }
    sum / path.len() as f64
}

/// Angle in `[0, pi]` between two consecutive segment vectors.
pub fn turning_angle(a: Vec3, b: Vec3) -> Result<f64, PathError> {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(PathError::ZeroLength);
    }
    Ok(a.cross(b).norm().atan2(a.dot(b)))
}

pub fn smoothness_cost(path: &CartesianPath) -> f64 {
    let w = path.waypoints();
    let joints = w.len() - 2;
    let sum: f64 = w
        .windows(3)
        .map(|t| {
            let (a, b) = (t[1] - t[0], t[2] - t[1]);
            // coincident points contribute no turn
            a.cross(b).norm().atan2(a.dot(b)) / PI
        })
        .sum();
    sum / joints as f64
}

pub fn evaluate_all(path: &CartesianPath, scenario: &Scenario) -> ObjectiveVector {
    ObjectiveVector([
        path_length_cost(path, scenario.r_min),
        collision_cost(path, scenario),
        altitude_cost(path, scenario),
        smoothness_cost(path),
    ])
}

pub fn weighted_sum(v: &ObjectiveVector, w: &WeightVector) -> f64 {
    if !v.is_feasible() {
        return f64::INFINITY;
    }
    v.0.iter().zip(w.0).map(|(f, w)| f * w).sum()
}
