#![allow(dead_code)]

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use nmopso::navdecode::{NavBounds, NavPath, NavTriplet};
use nmopso::scenario::{load_scenario_file, GenerateParams, KinematicLimits, Obstacle, Scenario, TerrainSource};
use nmopso::terrain::TerrainGrid;
use nmopso::{CartesianPath, ObjectiveVector, Vec3};
use rand::Rng;

pub fn bundled_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/bundled.json")
}

pub fn bundled() -> Scenario {
    load_scenario_file(&bundled_path()).expect("bundled scenario loads")
}

/// 200 m x 200 m flat ground at elevation 0, endpoints at the band center.
pub fn flat_scenario(obstacles: Vec<Obstacle>) -> Scenario {
    Scenario {
        terrain: TerrainGrid::flat(20, 20, 10.0, 0.0).unwrap(),
        terrain_source: TerrainSource::Generate {
            generate: GenerateParams { width: 20, height: 20, cellsize: 10.0, roughness: 0.0, seed: 0 },
        },
        start: Vec3::new(20.0, 20.0, 50.0),
        goal: Vec3::new(180.0, 180.0, 50.0),
        obstacles,
        drone_size: 1.0,
        safe_distance: 10.0,
        r_min: 5.0,
        h_min: 20.0,
        h_max: 80.0,
        limits: KinematicLimits::default(),
        n_nodes: 10,
    }
}

pub fn quarter_pi_bounds(r_min: f64, r_max: f64) -> NavBounds {
    NavBounds { r_min, r_max, theta_max: FRAC_PI_4, psi_max: FRAC_PI_4 }
}

pub fn random_nav<R: Rng>(rng: &mut R, n: usize, b: &NavBounds) -> NavPath {
    NavPath::new(
        (0..n)
            .map(|_| {
                NavTriplet::new(
                    rng.random_range(b.r_min..=b.r_max),
                    rng.random_range(-b.theta_max..=b.theta_max),
                    rng.random_range(-b.psi_max..=b.psi_max),
                )
            })
            .collect(),
    )
}

/// Random waypoints inside the flat scenario's footprint and altitude band.
pub fn random_flat_path<R: Rng>(rng: &mut R, m: usize) -> CartesianPath {
    let pts = (0..m)
        .map(|_| Vec3::new(rng.random_range(0.0..200.0), rng.random_range(0.0..200.0), rng.random_range(15.0..85.0)))
        .collect();
    CartesianPath::new(pts).unwrap()
}

pub fn random_objectives<R: Rng>(rng: &mut R, n: usize) -> Vec<ObjectiveVector> {
    (0..n).map(|_| ObjectiveVector(std::array::from_fn(|_| rng.random::<f64>()))).collect()
}

/// Plain O(n^2) Pareto filter; equal vectors do not dominate each other.
pub fn brute_force_front(points: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    let dom = |a: &ObjectiveVector, b: &ObjectiveVector| {
        let mut strict = false;
        for k in 0..4 {
            if a.0[k] > b.0[k] {
                return false;
            }
            if a.0[k] < b.0[k] {
                strict = true;
            }
        }
        strict
    };
    points.iter().filter(|p| !points.iter().any(|q| dom(q, p))).copied().collect()
}

pub fn sorted(mut v: Vec<ObjectiveVector>) -> Vec<ObjectiveVector> {
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    v
}
