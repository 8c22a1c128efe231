//! Pareto repository with an adaptive hypergrid.
//!
//! The grid spans the archive's objective extent padded by half a division
//! on each side, so with `M` divisions each axis has `M + 1` possible cell
//! indices `0..=M`. Crowded cells are less likely to supply leaders
//! (weight `exp(-kappa * N)`) and more likely to lose members when the
//! archive overflows (weight `exp(kappa * N)`).

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::objectives::ObjectiveVector;

#[derive(Debug, Error, PartialEq)]
pub enum ArchiveError {
    #[error("archive is empty")]
    Empty,
}

/// Pareto dominance for minimization.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let mut strictly = false;
    for (x, y) in a.0.iter().zip(&b.0) {
        if x > y {
            return false;
        }
        strictly |= x < y;
    }
    strictly
}

pub type CellCoord = [i64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypergrid {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub pad: [f64; 4],
    pub divisions: usize,
}

impl Hypergrid {
    /// Grid over `points`; `None` when there are no points.
    pub fn build(points: &[ObjectiveVector], divisions: usize) -> Option<Self> {
        assert!(divisions >= 2, "hypergrid needs at least 2 divisions");
        let first = points.first()?;
        let mut min = first.0;
        let mut max = first.0;
        for p in &points[1..] {
            for i in 0..4 {
                min[i] = min[i].min(p.0[i]);
                max[i] = max[i].max(p.0[i]);
            }
        }
        let mut grid = Hypergrid { lower: [0.0; 4], upper: [0.0; 4], pad: [0.0; 4], divisions };
        for i in 0..4 {
            let pad = (max[i] - min[i]) / (2.0 * (divisions as f64 - 1.0));
            grid.pad[i] = pad;
            grid.lower[i] = min[i] - pad;
            grid.upper[i] = max[i] + pad;
        }
        Some(grid)
    }

    /// Nearest-integer cell index per objective, ties away from zero.
    /// Zero-width dimensions map to index 0.
    pub fn cell_coord(&self, v: &ObjectiveVector) -> CellCoord {
        let m = self.divisions as f64;
        let mut c = [0i64; 4];
        for i in 0..4 {
            let width = self.upper[i] - self.lower[i];
            if width > 0.0 {
                c[i] = (m * (v.0[i] - self.lower[i]) / width).round() as i64;
            }
        }
        c
    }
}

/// Crowd measure `exp(-kappa * count)` of a cell.
pub fn crowd_measure(count: usize, kappa: f64) -> f64 {
    (-kappa * count as f64).exp()
}

/// Pick an index with probability proportional to `weights`.
fn weighted_pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // round-off fell past the end
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    /// Search-space coordinates of the solution.
    pub position: Vec<f64>,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
    cells: Vec<CellCoord>,
    grid: Option<Hypergrid>,
    capacity: usize,
    divisions: usize,
    kappa: f64,
}

impl Archive {
    pub fn new(capacity: usize, divisions: usize, kappa: f64) -> Self {
        assert!(capacity >= 1, "archive capacity must be positive");
        assert!(divisions >= 2, "hypergrid needs at least 2 divisions");
        Self { entries: Vec::new(), cells: Vec::new(), grid: None, capacity, divisions, kappa }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn grid(&self) -> Option<&Hypergrid> {
        self.grid.as_ref()
    }

    /// Cell of each entry, parallel to [`Archive::entries`].
    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    /// Members per occupied cell, in cell order.
    pub fn cell_members(&self) -> BTreeMap<CellCoord, Vec<usize>> {
        let mut map: BTreeMap<CellCoord, Vec<usize>> = BTreeMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            map.entry(*c).or_default().push(i);
        }
        map
    }

    pub fn occupied_cells(&self) -> usize {
        self.cell_members().len()
    }

    /// Leader-selection probability of each occupied cell.
    pub fn cell_probabilities(&self) -> Vec<(CellCoord, f64)> {
        let members = self.cell_members();
        let gammas: Vec<f64> = members.values().map(|m| crowd_measure(m.len(), self.kappa)).collect();
        let total: f64 = gammas.iter().sum();
        members.keys().zip(gammas).map(|(c, g)| (*c, g / total)).collect()
    }

    /// Roulette over occupied cells by crowd measure, then a uniform member.
    pub fn select_leader<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&ArchiveEntry, ArchiveError> {
        if self.entries.is_empty() {
            return Err(ArchiveError::Empty);
        }
        let members = self.cell_members();
        let groups: Vec<&Vec<usize>> = members.values().collect();
        let gammas: Vec<f64> = groups.iter().map(|m| crowd_measure(m.len(), self.kappa)).collect();
        let cell = groups[weighted_pick(&gammas, rng)];
        Ok(&self.entries[cell[rng.random_range(0..cell.len())]])
    }

    /// Merge `candidates`, keep the non-dominated set, prune to capacity and
    /// rebuild the grid. Infeasible candidates are ignored.
    pub fn update<R: Rng + ?Sized>(&mut self, candidates: impl IntoIterator<Item = ArchiveEntry>, rng: &mut R) {
        for cand in candidates {
            if !cand.objectives.is_feasible() {
                continue;
            }
            if self.entries.iter().any(|e| dominates(&e.objectives, &cand.objectives)) {
                continue;
            }
            self.entries.retain(|e| !dominates(&cand.objectives, &e.objectives));
            self.entries.push(cand);
        }
        self.regrid();
        if self.entries.len() > self.capacity {
            self.prune(rng);
            self.regrid();
        }
    }

    fn regrid(&mut self) {
        let points: Vec<ObjectiveVector> = self.entries.iter().map(|e| e.objectives).collect();
        self.grid = Hypergrid::build(&points, self.divisions);
        self.cells = match &self.grid {
            Some(g) => points.iter().map(|p| g.cell_coord(p)).collect(),
            None => Vec::new(),
        };
    }

    /// Drop members from crowded cells until at capacity. Cell coordinates
    /// stay those of the pre-prune grid.
    fn prune<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        while self.entries.len() > self.capacity {
            let members = self.cell_members();
            let groups: Vec<&Vec<usize>> = members.values().collect();
            let peak = groups.iter().map(|g| g.len()).max().unwrap_or(0) as f64;
            let weights: Vec<f64> = groups.iter().map(|g| (self.kappa * (g.len() as f64 - peak)).exp()).collect();
            let cell = groups[weighted_pick(&weights, rng)];
            let victim = cell[rng.random_range(0..cell.len())];
            self.entries.remove(victim);
            self.cells.remove(victim);
        }
    }
}
