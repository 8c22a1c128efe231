//! The multi-objective swarm.
//!
//! Each iteration runs in two phases. First every particle, using only its
//! own random stream and a frozen view of the archive, picks a leader,
//! moves, is decoded and scored, updates its personal best and may mutate;
//! this phase runs in parallel. Then a single coordinator merges the feasible
//! results into the archive, rebuilds the grid and damps the inertia.
//! Because no particle reads another's state mid-phase, results do not
//! depend on the thread count.

mod baseline;

pub use baseline::{run_weighted_pso, WeightedResult};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::archive::{dominates, Archive, ArchiveEntry};
use crate::geometry::Vec3;
use crate::navdecode::{decode_between, recover_nav, NavBounds, NavPath};
use crate::objectives::{evaluate_all, CartesianPath, ObjectiveVector};
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid swarm configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub population: usize,
    pub max_iterations: usize,
    /// Initial inertia weight.
    pub inertia: f64,
    /// Multiplier applied to the inertia after every iteration.
    pub inertia_damping: f64,
    pub c1: f64,
    pub c2: f64,
    pub grid_divisions: usize,
    pub kappa: f64,
    /// Mutation coefficient; `None` uses the number of occupied cells after
    /// initialization.
    pub delta: Option<f64>,
    /// Per-particle, per-iteration mutation probability.
    pub mutation_prob: f64,
    /// Velocity limit as a fraction of each dimension's range.
    pub v_max_fraction: f64,
    pub archive_capacity: usize,
    pub seed: u64,
    pub disable_mutation: bool,
    /// Search directly over interior waypoint coordinates instead of
    /// navigation variables.
    pub cartesian_encoding: bool,
    /// Worker threads for evaluation; 0 uses the global pool.
    pub threads: usize,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            population: 50,
            max_iterations: 200,
            inertia: 1.0,
            inertia_damping: 0.98,
            c1: 1.5,
            c2: 1.5,
            grid_divisions: 7,
            kappa: 2.0,
            delta: None,
            mutation_prob: 0.1,
            v_max_fraction: 0.5,
            archive_capacity: 100,
            seed: 42,
            disable_mutation: false,
            cartesian_encoding: false,
            threads: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |m: String| Err(EngineError::Config(m));
        if self.population < 2 {
            return fail(format!("population must be at least 2, got {}", self.population));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return fail(format!("mutation_prob must be in [0, 1], got {}", self.mutation_prob));
        }
        if !(self.v_max_fraction > 0.0 && self.v_max_fraction <= 1.0) {
            return fail(format!("v_max_fraction must be in (0, 1], got {}", self.v_max_fraction));
        }
        if self.grid_divisions < 2 {
            return fail(format!("grid_divisions must be at least 2, got {}", self.grid_divisions));
        }
        if self.archive_capacity == 0 {
            return fail("archive_capacity must be positive".into());
        }
        if !(self.kappa >= 0.0) {
            return fail(format!("kappa must be non-negative, got {}", self.kappa));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return fail(format!("delta must be positive, got {d}"));
            }
        }
        for (name, v) in [("inertia", self.inertia), ("inertia_damping", self.inertia_damping), ("c1", self.c1), ("c2", self.c2)] {
            if !v.is_finite() || v < 0.0 {
                return fail(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

/// Maps flat search positions to Cartesian paths.
#[derive(Debug, Clone)]
pub enum Encoding {
    Navigation { nodes: usize },
    Cartesian { nodes: usize },
}

impl Encoding {
    pub fn for_config(scenario: &Scenario, config: &SwarmConfig) -> Self {
        if config.cartesian_encoding {
            Encoding::Cartesian { nodes: scenario.n_nodes }
        } else {
            Encoding::Navigation { nodes: scenario.n_nodes }
        }
    }

    pub fn bounds(&self, scenario: &Scenario) -> (Vec<f64>, Vec<f64>) {
        match *self {
            Encoding::Navigation { nodes } => NavBounds::for_scenario(scenario).flat(nodes),
            Encoding::Cartesian { nodes } => {
                let (x0, y0, x1, y1) = scenario.terrain.bounds();
                let z0 = scenario.terrain.min_elevation() + scenario.h_min;
                let z1 = scenario.terrain.max_elevation() + scenario.h_max;
                ([x0, y0, z0].repeat(nodes), [x1, y1, z1].repeat(nodes))
            }
        }
    }

    pub fn decode(&self, position: &[f64], scenario: &Scenario) -> CartesianPath {
        match self {
            Encoding::Navigation { .. } => {
                let nav = NavPath::from_flat(position).expect("position length is a multiple of 3");
                decode_between(&nav, scenario.start, scenario.goal)
            }
            Encoding::Cartesian { .. } => {
                let mut points = Vec::with_capacity(position.len() / 3 + 2);
                points.push(scenario.start);
                points.extend(position.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])));
                points.push(scenario.goal);
                CartesianPath::new(points).expect("decoded path has at least three points")
            }
        }
    }

    /// Navigation triplets describing the chain part of a decoded solution.
    pub fn nav_path(&self, position: &[f64], path: &CartesianPath) -> NavPath {
        match *self {
            Encoding::Navigation { .. } => NavPath::from_flat(position).expect("position length is a multiple of 3"),
            Encoding::Cartesian { nodes } => match recover_nav(path) {
                Ok(mut nav) => {
                    nav.triplets.truncate(nodes);
                    nav
                }
                Err(_) => NavPath::new(Vec::new()),
            },
        }
    }
}

/// Feasible solutions first; otherwise plain Pareto dominance.
pub fn constrained_dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        _ => dominates(a, b),
    }
}

/// `tanh(delta / occupied_cells)`.
pub fn mutation_gain(occupied_cells: usize, delta: f64) -> f64 {
    (delta / occupied_cells.max(1) as f64).tanh()
}

/// Perturb one uniformly chosen dimension by `N(0, 1) * gain * pbest[j]`,
/// then clamp it into `[lo[j], hi[j]]`. Returns the dimension touched.
pub fn mutate<R: Rng + ?Sized>(
    position: &mut [f64],
    pbest: &[f64],
    gain: f64,
    lo: &[f64],
    hi: &[f64],
    rng: &mut R,
) -> usize {
    let j = rng.random_range(0..position.len());
    let n: f64 = rng.sample(StandardNormal);
    position[j] = (position[j] + n * gain * pbest[j]).clamp(lo[j], hi[j]);
    j
}

/// Velocity rule with explicit random factors:
/// `v = w*v + c1*r1*(pbest - x) + c2*r2*(leader - x)`, clamped to `+-v_max`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    velocity: &mut [f64],
    position: &[f64],
    pbest: &[f64],
    leader: &[f64],
    w: f64,
    c1: f64,
    c2: f64,
    r1: &[f64],
    r2: &[f64],
    v_max: &[f64],
) {
    for d in 0..velocity.len() {
        let v = w * velocity[d] + c1 * r1[d] * (pbest[d] - position[d]) + c2 * r2[d] * (leader[d] - position[d]);
        velocity[d] = v.clamp(-v_max[d], v_max[d]);
    }
}

/// Add the velocity and clamp to bounds, zeroing velocity where a bound was hit.
pub fn advance(position: &mut [f64], velocity: &mut [f64], lo: &[f64], hi: &[f64]) {
    for d in 0..position.len() {
        let x = position[d] + velocity[d];
        if x < lo[d] {
            position[d] = lo[d];
            velocity[d] = 0.0;
        } else if x > hi[d] {
            position[d] = hi[d];
            velocity[d] = 0.0;
        } else {
            position[d] = x;
        }
    }
}

pub(crate) fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub(crate) fn uniform_in<R: Rng + ?Sized>(lo: &[f64], hi: &[f64], rng: &mut R) -> Vec<f64> {
    lo.iter().zip(hi).map(|(&a, &b)| if b > a { rng.random_range(a..=b) } else { a }).collect()
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub objectives: ObjectiveVector,
    pub pbest: Vec<f64>,
    pub pbest_objectives: ObjectiveVector,
    /// Non-dominated set of every personal best held so far.
    pbest_history: Vec<ObjectiveVector>,
    rng: ChaCha8Rng,
}

impl Particle {
    /// Personal-best rule: a dominating result replaces, a dominated one is
    /// dropped, and an incomparable one replaces on a fair coin unless some
    /// earlier personal best dominates it.
    fn update_pbest(&mut self) {
        let new = self.objectives;
        let old = self.pbest_objectives;
        let replace = if constrained_dominates(&new, &old) {
            true
        } else if constrained_dominates(&old, &new) || new == old {
            false
        } else {
            self.rng.random_bool(0.5) && !self.pbest_history.iter().any(|h| constrained_dominates(h, &new))
        };
        if replace {
            self.pbest.clone_from(&self.position);
            self.pbest_objectives = new;
            self.pbest_history.retain(|h| !constrained_dominates(&new, h));
            self.pbest_history.push(new);
        }
    }
}

/// Read-only state shared by all particles during the move phase.
struct MoveContext<'a> {
    scenario: &'a Scenario,
    encoding: &'a Encoding,
    config: &'a SwarmConfig,
    archive: &'a Archive,
    pbests: &'a [Vec<f64>],
    lo: &'a [f64],
    hi: &'a [f64],
    v_max: &'a [f64],
    inertia: f64,
    gain: f64,
}

impl MoveContext<'_> {
    fn evaluate(&self, position: &[f64]) -> ObjectiveVector {
        evaluate_all(&self.encoding.decode(position, self.scenario), self.scenario)
    }

    /// Returns whether a mutation was attempted.
    fn move_particle(&self, p: &mut Particle) -> bool {
        let dims = p.position.len();
        let leader = match self.archive.select_leader(&mut p.rng) {
            Ok(e) => e.position.clone(),
            Err(_) => self.pbests[p.rng.random_range(0..self.pbests.len())].clone(),
        };
        let r1: Vec<f64> = (0..dims).map(|_| p.rng.random()).collect();
        let r2: Vec<f64> = (0..dims).map(|_| p.rng.random()).collect();
        let c = self.config;
        velocity_update(&mut p.velocity, &p.position, &p.pbest, &leader, self.inertia, c.c1, c.c2, &r1, &r2, self.v_max);
        advance(&mut p.position, &mut p.velocity, self.lo, self.hi);
        p.objectives = self.evaluate(&p.position);
        p.update_pbest();

        if c.disable_mutation || !p.rng.random_bool(c.mutation_prob) {
            return false;
        }
        mutate(&mut p.position, &p.pbest, self.gain, self.lo, self.hi, &mut p.rng);
        p.objectives = self.evaluate(&p.position);
        p.update_pbest();
        true
    }
}

#[derive(Debug, Clone)]
pub struct FrontMember {
    pub nav: NavPath,
    pub path: CartesianPath,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub pareto_front: Vec<FrontMember>,
    pub iterations_run: usize,
    pub wall_time: f64,
    pub rng_seed: u64,
    /// Particles feasible right after initialization.
    pub initial_feasible: usize,
    pub delta: f64,
    pub mutation_count: usize,
}

impl RunResult {
    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.pareto_front.iter().map(|m| m.objectives).collect()
    }
}

/// One NMOPSO run in progress.
pub struct Swarm<'a> {
    scenario: &'a Scenario,
    config: SwarmConfig,
    encoding: Encoding,
    particles: Vec<Particle>,
    archive: Archive,
    archive_rng: ChaCha8Rng,
    lo: Vec<f64>,
    hi: Vec<f64>,
    v_max: Vec<f64>,
    inertia: f64,
    delta: f64,
    iteration: usize,
    mutation_count: usize,
    initial_feasible: usize,
}

impl<'a> Swarm<'a> {
    /// Random initial swarm, seeded archive and mutation coefficient.
    pub fn init(scenario: &'a Scenario, config: SwarmConfig) -> Result<Self, EngineError> {
        scenario.validate()?;
        config.validate()?;
        let encoding = Encoding::for_config(scenario, &config);
        let (lo, hi) = encoding.bounds(scenario);
        let v_max: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| config.v_max_fraction * (b - a)).collect();

        let particles: Vec<Particle> = (0..config.population)
            .into_par_iter()
            .map(|i| {
                let mut rng = particle_rng(config.seed, i);
                let position = uniform_in(&lo, &hi, &mut rng);
                let objectives = evaluate_all(&encoding.decode(&position, scenario), scenario);
                Particle {
                    velocity: vec![0.0; position.len()],
                    pbest: position.clone(),
                    pbest_objectives: objectives,
                    pbest_history: vec![objectives],
                    objectives,
                    position,
                    rng,
                }
            })
            .collect();

        let mut archive = Archive::new(config.archive_capacity, config.grid_divisions, config.kappa);
        // particles use streams 1..; the archive takes stream 0
        let mut archive_rng = ChaCha8Rng::seed_from_u64(config.seed);
        archive.update(
            particles.iter().map(|p| ArchiveEntry { position: p.position.clone(), objectives: p.objectives }),
            &mut archive_rng,
        );
        let initial_feasible = particles.iter().filter(|p| p.objectives.is_feasible()).count();
        let delta = config.delta.unwrap_or_else(|| archive.occupied_cells().max(1) as f64);

        Ok(Self {
            scenario,
            inertia: config.inertia,
            config,
            encoding,
            particles,
            archive,
            archive_rng,
            lo,
            hi,
            v_max,
            delta,
            iteration: 0,
            mutation_count: 0,
            initial_feasible,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Number of mutation attempts so far.
    pub fn mutation_count(&self) -> usize {
        self.mutation_count
    }

    pub fn initial_feasible(&self) -> usize {
        self.initial_feasible
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    /// One full iteration.
    pub fn step(&mut self) {
        let pbests: Vec<Vec<f64>> = self.particles.iter().map(|p| p.pbest.clone()).collect();
        let ctx = MoveContext {
            scenario: self.scenario,
            encoding: &self.encoding,
            config: &self.config,
            archive: &self.archive,
            pbests: &pbests,
            lo: &self.lo,
            hi: &self.hi,
            v_max: &self.v_max,
            inertia: self.inertia,
            gain: mutation_gain(self.archive.occupied_cells(), self.delta),
        };
        let mutated: usize = self.particles.par_iter_mut().map(|p| ctx.move_particle(p) as usize).sum();
        self.mutation_count += mutated;

        let candidates: Vec<ArchiveEntry> = self
            .particles
            .iter()
            .filter(|p| p.objectives.is_feasible())
            .map(|p| ArchiveEntry { position: p.position.clone(), objectives: p.objectives })
            .collect();
        self.archive.update(candidates, &mut self.archive_rng);
        self.inertia *= self.config.inertia_damping;
        self.iteration += 1;
    }

    pub fn front(&self) -> Vec<FrontMember> {
        self.archive
            .entries()
            .iter()
            .map(|e| {
                let path = self.encoding.decode(&e.position, self.scenario);
                FrontMember { nav: self.encoding.nav_path(&e.position, &path), path, objectives: e.objectives }
            })
            .collect()
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, EngineError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}

/// Initialize and iterate for `max_iterations`, returning the archive as the front.
pub fn run(scenario: &Scenario, config: &SwarmConfig) -> Result<RunResult, EngineError> {
    let started = Instant::now();
    let config = config.clone();
    with_threads(config.threads, move || {
        let mut swarm = Swarm::init(scenario, config)?;
        while swarm.iteration() < swarm.config.max_iterations {
            swarm.step();
        }
        Ok(RunResult {
            pareto_front: swarm.front(),
            iterations_run: swarm.iteration(),
            wall_time: started.elapsed().as_secs_f64(),
            rng_seed: swarm.config.seed,
            initial_feasible: swarm.initial_feasible,
            delta: swarm.delta,
            mutation_count: swarm.mutation_count,
        })
    })?
}
