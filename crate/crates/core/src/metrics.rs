//! Front statistics and export formats.
//!
//! * front CSV: header `f1,f2,f3,f4`, one row per member
//! * paths JSON: `[{"objectives": [..4], "waypoints": [[x, y, z], ..]}, ..]`
//! * stats CSV: `objective,max,min,mean,std` rows for f1..f4, then `s_d,<value>,,,`
//!
//! Members are written in lexicographic order of their objective vectors and
//! numbers use the shortest representation that parses back to the same `f64`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::Hypergrid;
use crate::engine::{FrontMember, RunResult};
use crate::objectives::ObjectiveVector;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("front is empty")]
    EmptyFront,
    #[error("front member #{0} has a non-finite objective")]
    NonFinite(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontStats {
    pub objectives: [ObjectiveStats; 4],
    /// Solution distribution: front size over occupied grid cells.
    pub s_d: f64,
    pub n_p: usize,
    pub n_o: usize,
}

pub fn front_stats(front: &[ObjectiveVector], divisions: usize) -> Result<FrontStats, MetricsError> {
    if front.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    if let Some(i) = front.iter().position(|v| !v.is_feasible()) {
        return Err(MetricsError::NonFinite(i));
    }
    let n = front.len() as f64;
    let objectives = std::array::from_fn(|k| {
        let values = front.iter().map(|v| v.0[k]);
        let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
        let min = values.clone().fold(f64::INFINITY, f64::min);
        let mean = (values.clone().sum::<f64>() / n).clamp(min, max);
        let var = values.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        ObjectiveStats { max, min, mean, std: var.sqrt() }
    });
    let grid = Hypergrid::build(front, divisions).expect("front is non-empty");
    let n_o = front.iter().map(|v| grid.cell_coord(v)).collect::<BTreeSet<_>>().len();
    Ok(FrontStats { objectives, s_d: front.len() as f64 / n_o as f64, n_p: front.len(), n_o })
}

fn lexicographic(a: &ObjectiveVector, b: &ObjectiveVector) -> Ordering {
    a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Members sorted for export. Ties keep archive order.
pub fn sorted_members(front: &[FrontMember]) -> Vec<&FrontMember> {
    let mut members: Vec<&FrontMember> = front.iter().collect();
    members.sort_by(|a, b| lexicographic(&a.objectives, &b.objectives));
    members
}

pub fn front_csv(front: &[ObjectiveVector]) -> String {
    let mut rows: Vec<&ObjectiveVector> = front.iter().collect();
    rows.sort_by(|a, b| lexicographic(a, b));
    let mut out = String::from("f1,f2,f3,f4\n");
    for v in rows {
        let _ = writeln!(out, "{},{},{},{}", v.0[0], v.0[1], v.0[2], v.0[3]);
    }
    out
}

pub fn parse_front_csv(text: &str) -> Result<Vec<ObjectiveVector>, MetricsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "f1,f2,f3,f4")) => {}
        _ => return Err(MetricsError::Parse { line: 1, message: "expected header `f1,f2,f3,f4`".into() }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let vals: Result<Vec<f64>, _> = l.split(',').map(|t| t.trim().parse::<f64>()).collect();
            match vals {
                Ok(v) if v.len() == 4 => Ok(ObjectiveVector::new(v[0], v[1], v[2], v[3])),
                _ => Err(MetricsError::Parse { line: i + 1, message: format!("bad row `{l}`") }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub objectives: [f64; 4],
    pub waypoints: Vec<[f64; 3]>,
}

pub fn paths_json(front: &[FrontMember]) -> String {
    let records: Vec<PathRecord> = sorted_members(front)
        .into_iter()
        .map(|m| PathRecord {
            objectives: m.objectives.0,
            waypoints: m.path.waypoints().iter().map(|p| p.to_array()).collect(),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records).expect("finite front serializes");
    text.push('\n');
    text
}

pub fn stats_csv(stats: &FrontStats) -> String {
    let mut out = String::from("objective,max,min,mean,std\n");
    for (k, s) in stats.objectives.iter().enumerate() {
        let _ = writeln!(out, "f{},{},{},{},{}", k + 1, s.max, s.min, s.mean, s.std);
    }
    let _ = writeln!(out, "s_d,{},,,", stats.s_d);
    out
}

/// Contents of the three output files of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportedFront {
    pub front_csv: String,
    pub paths_json: String,
    pub stats_csv: String,
}

pub fn export_front(result: &RunResult, stats: &FrontStats) -> ExportedFront {
    ExportedFront {
        front_csv: front_csv(&result.objectives()),
        paths_json: paths_json(&result.pareto_front),
        stats_csv: stats_csv(stats),
    }
}
