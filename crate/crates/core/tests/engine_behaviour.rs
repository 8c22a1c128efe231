mod common;

use nmopso::archive::dominates;
use nmopso::engine::{mutate, mutation_gain, run, run_weighted_pso, Swarm, SwarmConfig};
use nmopso::{ObjectiveVector, WeightVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_front, bundled, flat_scenario};

fn quick(seed: u64) -> SwarmConfig {
    SwarmConfig { population: 20, max_iterations: 40, seed, ..SwarmConfig::default() }
}

#[test]
fn thread_count_does_not_change_results() {
    let s = bundled();
    let one = run(&s, &SwarmConfig { threads: 1, ..quick(9) }).unwrap();
    let four = run(&s, &SwarmConfig { threads: 4, ..quick(9) }).unwrap();
    assert_eq!(one.objectives(), four.objectives());
    let pos = |r: &nmopso::RunResult| r.pareto_front.iter().map(|m| m.nav.to_flat()).collect::<Vec<_>>();
    assert_eq!(pos(&one), pos(&four));
}

#[test]
fn flat_initialization_finds_feasible_particles() {
    let s = flat_scenario(vec![]);
    let feasible: Vec<usize> = (0..10)
        .map(|seed| Swarm::init(&s, SwarmConfig { seed, ..SwarmConfig::default() }).unwrap().initial_feasible())
        .collect();
    assert!(feasible.iter().sum::<usize>() >= 1, "{feasible:?}");
}

#[test]
fn flat_run_reaches_near_straight_path() {
    let s = flat_scenario(vec![]);
    let r = run(&s, &SwarmConfig::default()).unwrap();
    let best = r.objectives().iter().map(|v| v.f1()).fold(f64::INFINITY, f64::min);
    assert!(best <= 0.01, "best f1 {best}");
    assert!(r.objectives().iter().all(|v| v.is_feasible()));
}

#[test]
fn logged_run_keeps_invariants() {
    let s = bundled();
    let config = SwarmConfig { population: 30, max_iterations: 60, seed: 4, ..SwarmConfig::default() };
    let mut swarm = Swarm::init(&s, config).unwrap();
    let mut history: Vec<Vec<ObjectiveVector>> = swarm.particles().iter().map(|p| vec![p.pbest_objectives]).collect();
    let mut prev_front: Vec<ObjectiveVector> = swarm.archive().entries().iter().map(|e| e.objectives).collect();
    for _ in 0..60 {
        swarm.step();
        let (lo, hi) = swarm.bounds();
        for (i, p) in swarm.particles().iter().enumerate() {
            for d in 0..p.position.len() {
                assert!(p.position[d].is_finite() && p.velocity[d].is_finite());
                assert!(lo[d] <= p.position[d] && p.position[d] <= hi[d]);
            }
            let new = p.pbest_objectives;
            assert!(!history[i].iter().any(|h| dominates(h, &new)), "particle {i} pbest regressed");
            history[i].push(new);
        }
        let front: Vec<ObjectiveVector> = swarm.archive().entries().iter().map(|e| e.objectives).collect();
        for a in &front {
            assert!(a.is_feasible());
            assert!(!front.iter().any(|b| dominates(b, a)));
        }
        // no survivor of the old front dominates the whole new one
        let mut union = prev_front.clone();
        union.extend(&front);
        for a in brute_force_front(&union).iter().filter(|a| prev_front.contains(a)) {
            assert!(front.is_empty() || !front.iter().all(|b| dominates(a, b)));
        }
        prev_front = front;
    }
}

#[test]
fn disabled_mutation_is_never_called() {
    let s = bundled();
    let r = run(&s, &SwarmConfig { disable_mutation: true, ..quick(2) }).unwrap();
    assert_eq!(r.mutation_count, 0);
    let r = run(&s, &quick(2)).unwrap();
    assert!(r.mutation_count > 0);
}

#[test]
fn mutation_noise_has_unit_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 10_000;
    let mut sq = 0.0;
    let mut sum = 0.0;
    for _ in 0..n {
        let mut x = [0.0; 3];
        let j = mutate(&mut x, &[1.0; 3], 1.0, &[-1e9; 3], &[1e9; 3], &mut rng);
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 1);
        sum += x[j];
        sq += x[j] * x[j];
    }
    let mean = sum / n as f64;
    let std = (sq / n as f64 - mean * mean).sqrt();
    assert!((std - 1.0).abs() < 0.05, "std {std}");
}

#[test]
fn gain_values() {
    assert!((mutation_gain(5, 5.0) - 0.7615941559557649).abs() < 1e-12);
    assert!(mutation_gain(501, 5.0) < 0.01);
    for n in 1..50 {
        assert!(mutation_gain(n + 1, 5.0) < mutation_gain(n, 5.0));
    }
}

#[test]
fn weighted_pso_is_monotone_and_deterministic() {
    let s = bundled();
    let a = run_weighted_pso(&s, &quick(6), WeightVector::UNIT).unwrap();
    let b = run_weighted_pso(&s, &quick(6), WeightVector::UNIT).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.position, b.position);
    assert_eq!(a.history.len(), 41);
    assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn weighted_pso_halves_flat_cost() {
    // wide altitude band so every seed starts from a feasible best
    let mut s = flat_scenario(vec![]);
    s.h_min = 0.0;
    s.h_max = 400.0;
    s.start.z = 200.0;
    s.goal.z = 200.0;
    let mut ratios: Vec<f64> = (0..10)
        .map(|seed| {
            let r = run_weighted_pso(&s, &SwarmConfig { seed, ..SwarmConfig::default() }, WeightVector::UNIT).unwrap();
            assert!(r.history[0].is_finite(), "seed {seed} starts infeasible");
            r.cost / r.history[0]
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = (ratios[4] + ratios[5]) / 2.0;
    assert!(median <= 0.5, "{ratios:?}");
}
