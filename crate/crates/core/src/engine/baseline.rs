//! Single-objective PSO over the same navigation encoding, scoring paths by
//! a weighted sum of the four costs and steering with the global best.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{advance, particle_rng, uniform_in, velocity_update, with_threads, EngineError, Encoding, SwarmConfig};
use crate::navdecode::NavPath;
use crate::objectives::{evaluate_all, weighted_sum, CartesianPath, ObjectiveVector, WeightVector};
use crate::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct WeightedResult {
    pub position: Vec<f64>,
    pub nav: NavPath,
    pub path: CartesianPath,
    pub objectives: ObjectiveVector,
    pub cost: f64,
    /// Global-best cost after initialization and after each iteration.
    pub history: Vec<f64>,
    pub wall_time: f64,
}

struct Member {
    position: Vec<f64>,
    velocity: Vec<f64>,
    cost: f64,
    objectives: ObjectiveVector,
    pbest: Vec<f64>,
    pbest_cost: f64,
    pbest_objectives: ObjectiveVector,
    rng: rand_chacha::ChaCha8Rng,
}

/// Index of the lowest cost, earliest on ties.
fn best_index(members: &[Member]) -> usize {
    let mut best = 0;
    for (i, m) in members.iter().enumerate() {
        if m.pbest_cost < members[best].pbest_cost {
            best = i;
        }
    }
    best
}

/// Always uses the navigation encoding; mutation and archive settings in
/// `config` are ignored.
pub fn run_weighted_pso(scenario: &Scenario, config: &SwarmConfig, weights: WeightVector) -> Result<WeightedResult, EngineError> {
    scenario.validate()?;
    config.validate()?;
    let started = Instant::now();
    let encoding = Encoding::Navigation { nodes: scenario.n_nodes };
    let (lo, hi) = encoding.bounds(scenario);
    let v_max: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| config.v_max_fraction * (b - a)).collect();
    let score = |x: &[f64]| {
        let obj = evaluate_all(&encoding.decode(x, scenario), scenario);
        (weighted_sum(&obj, &weights), obj)
    };

    with_threads(config.threads, || {
        let mut members: Vec<Member> = (0..config.population)
            .into_par_iter()
            .map(|i| {
                let mut rng = particle_rng(config.seed, i);
                let position = uniform_in(&lo, &hi, &mut rng);
                let (cost, objectives) = score(&position);
                Member {
                    velocity: vec![0.0; position.len()],
                    pbest: position.clone(),
                    pbest_cost: cost,
                    pbest_objectives: objectives,
                    position,
                    cost,
                    objectives,
                    rng,
                }
            })
            .collect();

        let mut gbest = members[best_index(&members)].pbest.clone();
        let mut gbest_cost = members[best_index(&members)].pbest_cost;
        let mut gbest_objectives = members[best_index(&members)].pbest_objectives;
        let mut history = vec![gbest_cost];
        let mut inertia = config.inertia;

        for _ in 0..config.max_iterations {
            members.par_iter_mut().for_each(|m| {
                let dims = m.position.len();
                let r1: Vec<f64> = (0..dims).map(|_| m.rng.random()).collect();
                let r2: Vec<f64> = (0..dims).map(|_| m.rng.random()).collect();
                velocity_update(&mut m.velocity, &m.position, &m.pbest, &gbest, inertia, config.c1, config.c2, &r1, &r2, &v_max);
                advance(&mut m.position, &mut m.velocity, &lo, &hi);
                (m.cost, m.objectives) = score(&m.position);
                if m.cost < m.pbest_cost {
                    m.pbest.clone_from(&m.position);
                    m.pbest_cost = m.cost;
                    m.pbest_objectives = m.objectives;
                }
            });
            let b = best_index(&members);
            if members[b].pbest_cost < gbest_cost {
                gbest.clone_from(&members[b].pbest);
                gbest_cost = members[b].pbest_cost;
                gbest_objectives = members[b].pbest_objectives;
            }
            history.push(gbest_cost);
            inertia *= config.inertia_damping;
        }

        let path = encoding.decode(&gbest, scenario);
        WeightedResult {
            nav: encoding.nav_path(&gbest, &path),
            path,
            objectives: gbest_objectives,
            cost: gbest_cost,
            position: gbest,
            history,
            wall_time: started.elapsed().as_secs_f64(),
        }
    })
}
