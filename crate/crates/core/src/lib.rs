//! Multi-objective UAV path planning with a navigation-variable particle swarm.
//!
//! Candidate paths are encoded as chains of `(r, θ, ψ)` segments (length,
//! climb, turn) that are decoded into Cartesian waypoints through chained
//! homogeneous transforms. Four normalized costs (length, obstacle
//! proximity, altitude band, smoothness) are minimized jointly; the
//! non-dominated set is kept in an archive indexed by an adaptive hypergrid
//! that drives crowd-aware leader selection and an adaptive mutation gain.
//!
//! Module layout:
//!
//! * [`terrain`] - elevation rasters: load, generate, sample
//! * [`scenario`] - problem instance (endpoints, obstacles, limits)
//! * [`objectives`] - the four costs and weighted-sum scalarization
//! * [`navdecode`] - navigation variables and Cartesian decoding
//! * [`archive`] - Pareto repository and hypergrid
//! * [`engine`] - swarm loop, mutation, weighted-sum PSO baseline
//! * [`metrics`] - front statistics and export
//! * [`cli`] - command-line front end

pub mod archive;
pub mod cli;
pub mod engine;
pub mod geometry;
pub mod metrics;
pub mod navdecode;
pub mod objectives;
pub mod scenario;
pub mod terrain;

pub use archive::{Archive, ArchiveEntry, Hypergrid};
pub use engine::{RunResult, SwarmConfig};
pub use geometry::Vec3;
pub use navdecode::{NavPath, NavTriplet, Transform};
pub use objectives::{CartesianPath, ObjectiveVector, WeightVector};
pub use scenario::{KinematicLimits, Obstacle, Scenario};
pub use terrain::TerrainGrid;
