//! Planning problem instances.
//!
//! Scenario files are JSON:
//!
//! ```json
//! {
//!   "terrain": { "generate": { "width": 50, "height": 50, "cellsize": 10,
//!                              "roughness": 0.5, "seed": 7 } },
//!   "start": [50, 50, 80], "goal": [450, 450, 90],
//!   "obstacles": [ { "x": 200, "y": 220, "radius": 35 } ],
//!   "drone_size": 1, "safe_distance": 20, "r_min": 10,
//!   "h_min": 30, "h_max": 130,
//!   "theta_max": 0.7853981633974483, "psi_max": 0.7853981633974483,
//!   "v_min": 0, "v_max": 20, "n_nodes": 10
//! }
//! ```
//!
//! `terrain` may instead be a path to a raster file, resolved relative to the
//! scenario file. Lengths are meters, angles radians. `start`/`goal` z values
//! are absolute elevations. Obstacles are vertical cylinders of unbounded
//! height, so only their xy footprint matters.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::terrain::{generate_terrain, load_terrain, TerrainError, TerrainGrid};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
    #[error("cannot read terrain file {path}: {source}")]
    TerrainIo { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    #[serde(rename = "x")]
    pub center_x: f64,
    #[serde(rename = "y")]
    pub center_y: f64,
    pub radius: f64,
}

impl Obstacle {
    pub fn new(center_x: f64, center_y: f64, radius: f64) -> Self {
        Self { center_x, center_y, radius }
    }
}

/// Per-joint climb/turn bounds. Speeds are carried for reporting only;
/// decoded paths have no timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicLimits {
    pub theta_max: f64,
    pub psi_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self { theta_max: FRAC_PI_4, psi_max: FRAC_PI_4, v_min: 0.0, v_max: 20.0 }
    }
}

impl KinematicLimits {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.theta_max > 0.0 && self.theta_max <= FRAC_PI_2) {
            return Err(invalid(format!("theta_max must be in (0, pi/2], got {}", self.theta_max)));
        }
        if !(self.psi_max > 0.0 && self.psi_max <= PI) {
            return Err(invalid(format!("psi_max must be in (0, pi], got {}", self.psi_max)));
        }
        if !(self.v_min <= self.v_max) {
            return Err(invalid(format!("v_min {} exceeds v_max {}", self.v_min, self.v_max)));
        }
        Ok(())
    }
}

/// Direction of flight as climb angle above the horizontal and heading
/// (counter-clockwise from +x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingState {
    pub climb: f64,
    pub turn: f64,
}

impl HeadingState {
    /// Heading of a non-zero direction vector. Purely vertical vectors get
    /// heading 0.
    pub fn of_direction(d: Vec3) -> Self {
        let h = d.horizontal_norm();
        let turn = if h > 0.0 { d.y.atan2(d.x) } else { 0.0 };
        Self { climb: d.z.atan2(h), turn }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerateParams {
    pub width: usize,
    pub height: usize,
    pub cellsize: f64,
    pub roughness: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TerrainSource {
    File(PathBuf),
    Generate { generate: GenerateParams },
}

impl TerrainSource {
    pub fn load(&self, base: Option<&Path>) -> Result<TerrainGrid, ScenarioError> {
        match self {
            TerrainSource::File(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| ScenarioError::TerrainIo { path: path.clone(), source })?;
                Ok(load_terrain(&text)?)
            }
            TerrainSource::Generate { generate: g } => {
                Ok(generate_terrain(g.width, g.height, g.cellsize, g.roughness, g.seed)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub terrain: TerrainGrid,
    pub terrain_source: TerrainSource,
    pub start: Vec3,
    pub goal: Vec3,
    pub obstacles: Vec<Obstacle>,
    /// UAV size `D`.
    pub drone_size: f64,
    /// Width `S` of the danger band outside the collision distance.
    pub safe_distance: f64,
    /// Minimum segment length.
    pub r_min: f64,
    /// Relative altitude band above terrain.
    pub h_min: f64,
    pub h_max: f64,
    pub limits: KinematicLimits,
    /// Number of navigation triplets (decoded interior waypoints).
    pub n_nodes: usize,
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.start.is_finite() || !self.goal.is_finite() {
            return Err(invalid("start and goal must be finite"));
        }
        if self.start == self.goal {
            return Err(invalid("start and goal coincide"));
        }
        for (name, p) in [("start", self.start), ("goal", self.goal)] {
            if !self.terrain.contains(p.x, p.y) {
                return Err(invalid(format!("{name} ({}, {}) is outside the terrain", p.x, p.y)));
            }
        }
        if !(self.h_min < self.h_max) {
            return Err(invalid(format!("h_min {} must be below h_max {}", self.h_min, self.h_max)));
        }
        if !(self.r_min > 0.0) {
            return Err(invalid(format!("r_min must be positive, got {}", self.r_min)));
        }
        if !(self.drone_size >= 0.0) {
            return Err(invalid(format!("drone_size must be non-negative, got {}", self.drone_size)));
        }
        if !(self.safe_distance >= 0.0) {
            return Err(invalid(format!("safe_distance must be non-negative, got {}", self.safe_distance)));
        }
        if self.n_nodes == 0 {
            return Err(invalid("n_nodes must be at least 1"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) || !o.center_x.is_finite() || !o.center_y.is_finite() {
                return Err(invalid(format!("obstacle #{i} needs a finite center and positive radius")));
            }
        }
        self.limits.validate()?;
        if self.r_min > self.r_max_cap() {
            return Err(invalid(format!(
                "r_min {} exceeds the segment cap {} (2 * chord / n_nodes)",
                self.r_min,
                self.r_max_cap()
            )));
        }
        Ok(())
    }

    /// Straight-line distance from start to goal.
    pub fn chord(&self) -> f64 {
        self.start.distance(self.goal)
    }

    /// Upper bound on each navigation segment length.
    pub fn r_max_cap(&self) -> f64 {
        2.0 * self.chord() / self.n_nodes as f64
    }

    pub fn h_mean(&self) -> f64 {
        0.5 * (self.h_max + self.h_min)
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            terrain: self.terrain_source.clone(),
            start: self.start.to_array(),
            goal: self.goal.to_array(),
            obstacles: self.obstacles.clone(),
            drone_size: self.drone_size,
            safe_distance: self.safe_distance,
            r_min: self.r_min,
            h_min: self.h_min,
            h_max: self.h_max,
            theta_max: self.limits.theta_max,
            psi_max: self.limits.psi_max,
            v_min: self.limits.v_min,
            v_max: self.limits.v_max,
            n_nodes: self.n_nodes,
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }
}

fn default_angle() -> f64 {
    FRAC_PI_4
}
fn default_v_max() -> f64 {
    KinematicLimits::default().v_max
}
fn default_nodes() -> usize {
    10
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    terrain: TerrainSource,
    start: [f64; 3],
    goal: [f64; 3],
    #[serde(default)]
    obstacles: Vec<Obstacle>,
    drone_size: f64,
    safe_distance: f64,
    r_min: f64,
    h_min: f64,
    h_max: f64,
    #[serde(default = "default_angle")]
    theta_max: f64,
    #[serde(default = "default_angle")]
    psi_max: f64,
    #[serde(default)]
    v_min: f64,
    #[serde(default = "default_v_max")]
    v_max: f64,
    #[serde(default = "default_nodes")]
    n_nodes: usize,
}

/// Parse and validate a scenario. Relative terrain paths resolve against
/// `base` when given.
pub fn parse_scenario(text: &str, base: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let terrain = file.terrain.load(base)?;
    let scenario = Scenario {
        terrain,
        terrain_source: file.terrain,
        start: file.start.into(),
        goal: file.goal.into(),
        obstacles: file.obstacles,
        drone_size: file.drone_size,
        safe_distance: file.safe_distance,
        r_min: file.r_min,
        h_min: file.h_min,
        h_max: file.h_max,
        limits: KinematicLimits {
            theta_max: file.theta_max,
            psi_max: file.psi_max,
            v_min: file.v_min,
            v_max: file.v_max,
        },
        n_nodes: file.n_nodes,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Read a scenario file from disk, resolving terrain paths next to it.
pub fn load_scenario_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text, path.parent())
}
