mod common;

use std::collections::BTreeSet;

use nmopso::archive::{dominates, Archive, ArchiveEntry, Hypergrid};
use nmopso::metrics::{front_csv, front_stats, parse_front_csv};
use nmopso::ObjectiveVector;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_front, random_objectives, sorted};

fn entry(v: ObjectiveVector) -> ArchiveEntry {
    ArchiveEntry { position: v.0.to_vec(), objectives: v }
}

fn arb_vector() -> impl Strategy<Value = ObjectiveVector> {
    // coarse values so ties and duplicates show up
    [0u8..6, 0u8..6, 0u8..6, 0u8..6].prop_map(|a| ObjectiveVector(a.map(|x| x as f64 / 5.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn incremental_updates_match_brute_force(batches in prop::collection::vec(prop::collection::vec(arb_vector(), 0..25), 1..8)) {
        let mut archive = Archive::new(10_000, 7, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = Vec::new();
        for batch in batches {
            seen.extend(batch.iter().copied());
            archive.update(batch.into_iter().map(entry), &mut rng);
            let got: Vec<_> = archive.entries().iter().map(|e| e.objectives).collect();
            prop_assert_eq!(sorted(got.clone()), sorted(brute_force_front(&seen)));
            for a in &got {
                prop_assert!(!got.iter().any(|b| dominates(b, a)));
            }
        }
    }

    #[test]
    fn capacity_cells_and_idempotence(seed in any::<u64>(), cap in 1usize..30, n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // points on the simplex are mutually non-dominated
        let pts: Vec<ObjectiveVector> = (0..n).map(|_| {
            let a: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
            let s = a.iter().sum::<f64>() + 1e-9;
            ObjectiveVector::new(a[0] / s, a[1] / s, a[2] / s, 1.0 - (a[0] + a[1] + a[2]) / s)
        }).collect();
        let mut archive = Archive::new(cap, 7, 2.0);
        archive.update(pts.into_iter().map(entry), &mut rng);
        prop_assert!(archive.len() <= cap);
        prop_assert!(archive.cells().iter().all(|c| c.iter().all(|&x| (0..=7).contains(&x))));
        let total: f64 = archive.cell_probabilities().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);

        let before: Vec<_> = archive.entries().to_vec();
        archive.update(std::iter::empty(), &mut rng);
        prop_assert_eq!(archive.entries(), &before[..]);
    }

    #[test]
    fn s_d_ignores_member_order(seed in any::<u64>(), n in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut front = random_objectives(&mut rng, n);
        let a = front_stats(&front, 7).unwrap();
        front.shuffle(&mut rng);
        let b = front_stats(&front, 7).unwrap();
        prop_assert_eq!(a.s_d, b.s_d);
        prop_assert_eq!(a.n_o, b.n_o);
        prop_assert!(a.s_d >= 1.0 && a.n_o <= a.n_p);
        for o in a.objectives {
            prop_assert!(o.min <= o.mean && o.mean <= o.max);
        }
    }
}

#[test]
fn front_stats_match_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.random_range(1..80);
        let front = random_objectives(&mut rng, n);
        let s = front_stats(&front, 7).unwrap();
        for k in 0..4 {
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            let mut sum = 0.0;
            for v in &front {
                max = max.max(v.0[k]);
                min = min.min(v.0[k]);
                sum += v.0[k];
            }
            let mean = (sum / n as f64).clamp(min, max);
            let mut sq = 0.0;
            for v in &front {
                sq += (v.0[k] - mean).powi(2);
            }
            let std = (sq / n as f64).sqrt();
            assert_eq!((s.objectives[k].max, s.objectives[k].min, s.objectives[k].mean, s.objectives[k].std), (max, min, mean, std));
        }
        // occupied cells by hand from the padded bounds
        let mut cells = BTreeSet::new();
        for v in &front {
            let mut c = [0i64; 4];
            for k in 0..4 {
                let lo = front.iter().map(|u| u.0[k]).fold(f64::INFINITY, f64::min);
                let hi = front.iter().map(|u| u.0[k]).fold(f64::NEG_INFINITY, f64::max);
                let eps = (hi - lo) / 12.0;
                if hi > lo {
                    c[k] = (7.0 * (v.0[k] - (lo - eps)) / ((hi + eps) - (lo - eps))).round() as i64;
                }
            }
            cells.insert(c);
        }
        assert_eq!(s.n_o, cells.len());
        assert_eq!(s.s_d, n as f64 / cells.len() as f64);
    }
}

#[test]
fn exported_rows_round_trip_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let front = random_objectives(&mut rng, 40);
        let text = front_csv(&front);
        assert_eq!(text, front_csv(&front));
        assert_eq!(sorted(parse_front_csv(&text).unwrap()), sorted(front));
    }
}

#[test]
fn grid_padding_example() {
    let g = Hypergrid::build(&[ObjectiveVector::new(0.0, 0.0, 0.0, 0.0), ObjectiveVector::new(1.0, 0.0, 0.0, 0.0)], 7).unwrap();
    assert!((g.lower[0] + 1.0 / 12.0).abs() < 1e-15);
    assert!((g.upper[0] - 13.0 / 12.0).abs() < 1e-15);
    assert_eq!(g.pad[1], 0.0);
}
