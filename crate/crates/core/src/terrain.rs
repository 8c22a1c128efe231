//! Ground elevation rasters.
//!
//! A [`TerrainGrid`] stores one elevation per cell. Cell centers sit at
//! `origin + (col + 0.5, row + 0.5) * cellsize` measured from the lower-left
//! corner, and [`TerrainGrid::elevation_at`] interpolates bilinearly between
//! the four surrounding centers. Within the outer half-cell border the
//! nearest edge value is extended; anything past the footprint is an error.
//!
//! Text format (ESRI-ASCII-like, without nodata):
//!
//! ```text
//! ncols 3
//! nrows 2
//! xllcorner 0
//! yllcorner 0
//! cellsize 10
//! 1 2 3
//! 4 5 6
//! ```
//!
//! Data rows are listed top (north) row first.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TerrainError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("point ({x}, {y}) lies outside the terrain footprint")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid terrain: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid {
    ncols: usize,
    nrows: usize,
    origin_x: f64,
    origin_y: f64,
    cellsize: f64,
    /// Row-major, top row first.
    elevations: Vec<f64>,
}

const HEADER_KEYS: [&str; 5] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize"];

impl TerrainGrid {
    pub fn new(
        ncols: usize,
        nrows: usize,
        origin_x: f64,
        origin_y: f64,
        cellsize: f64,
        elevations: Vec<f64>,
    ) -> Result<Self, TerrainError> {
        if ncols < 2 || nrows < 2 {
            return Err(TerrainError::Invalid(format!(
                "grid must be at least 2x2, got {ncols}x{nrows}"
            )));
        }
        if !(cellsize > 0.0 && cellsize.is_finite()) {
            return Err(TerrainError::Invalid(format!("cellsize must be positive, got {cellsize}")));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(TerrainError::Invalid("origin must be finite".into()));
        }
        if elevations.len() != ncols * nrows {
            return Err(TerrainError::Invalid(format!(
                "expected {} elevations, got {}",
                ncols * nrows,
                elevations.len()
            )));
        }
        if let Some(i) = elevations.iter().position(|e| !e.is_finite()) {
            return Err(TerrainError::Invalid(format!("elevation #{i} is not finite")));
        }
        Ok(Self { ncols, nrows, origin_x, origin_y, cellsize, elevations })
    }

    /// Constant-elevation grid covering `[origin, origin + n * cellsize]`.
    pub fn flat(ncols: usize, nrows: usize, cellsize: f64, elevation: f64) -> Result<Self, TerrainError> {
        Self::new(ncols, nrows, 0.0, 0.0, cellsize, vec![elevation; ncols * nrows])
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.origin_x, self.origin_y)
    }

    pub fn cellsize(&self) -> f64 {
        self.cellsize
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    /// Stored value at `(col, row)`, with `row` counted from the top.
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.elevations[row * self.ncols + col]
    }

    /// World coordinates of the center of cell `(col, row)`, `row` from the top.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        let x = self.origin_x + (col as f64 + 0.5) * self.cellsize;
        let y = self.origin_y + ((self.nrows - 1 - row) as f64 + 0.5) * self.cellsize;
        (x, y)
    }

    /// `(xmin, ymin, xmax, ymax)` of the footprint.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.ncols as f64 * self.cellsize,
            self.origin_y + self.nrows as f64 * self.cellsize,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, y0, x1, y1) = self.bounds();
        (x0..=x1).contains(&x) && (y0..=y1).contains(&y)
    }

    pub fn min_elevation(&self) -> f64 {
        self.elevations.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_elevation(&self) -> f64 {
        self.elevations.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn elevation_at(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        if !self.contains(x, y) {
            return Err(TerrainError::OutOfBounds { x, y });
        }
        // fractional column index, and row index counted from the bottom
        let fx = ((x - self.origin_x) / self.cellsize - 0.5).clamp(0.0, (self.ncols - 1) as f64);
        let fy = ((y - self.origin_y) / self.cellsize - 0.5).clamp(0.0, (self.nrows - 1) as f64);
        let c0 = (fx.floor() as usize).min(self.ncols - 2);
        let b0 = (fy.floor() as usize).min(self.nrows - 2);
        let tx = fx - c0 as f64;
        let ty = fy - b0 as f64;
        let lower = self.nrows - 1 - b0;
        let upper = lower - 1;
        let lerp = |a: f64, b: f64, t: f64| (1.0 - t) * a + t * b;
        let south = lerp(self.get(c0, lower), self.get(c0 + 1, lower), tx);
        let north = lerp(self.get(c0, upper), self.get(c0 + 1, upper), tx);
        Ok(lerp(south, north, ty))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncols {}", self.ncols);
        let _ = writeln!(out, "nrows {}", self.nrows);
        let _ = writeln!(out, "xllcorner {}", self.origin_x);
        let _ = writeln!(out, "yllcorner {}", self.origin_y);
        let _ = writeln!(out, "cellsize {}", self.cellsize);
        for row in self.elevations.chunks(self.ncols) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parse the text raster format.
pub fn load_terrain(text: &str) -> Result<TerrainGrid, TerrainError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header = [0.0f64; 5];
    for (slot, key) in header.iter_mut().zip(HEADER_KEYS) {
        let (line, content) = lines.next().ok_or(TerrainError::Parse {
            line: 0,
            message: format!("missing header field `{key}`"),
        })?;
        let mut parts = content.split_whitespace();
        let found = parts.next().unwrap_or("");
        if !found.eq_ignore_ascii_case(key) {
            return Err(TerrainError::Parse { line, message: format!("expected `{key}`, found `{found}`") });
        }
        let value = parts.next().ok_or(TerrainError::Parse { line, message: format!("`{key}` has no value") })?;
        if parts.next().is_some() {
            return Err(TerrainError::Parse { line, message: format!("trailing data after `{key}`") });
        }
        *slot = value
            .parse()
            .map_err(|_| TerrainError::Parse { line, message: format!("`{key}` value `{value}` is not a number") })?;
    }
    let as_count = |v: f64, line: usize, key: &str| {
        if v.fract() == 0.0 && v >= 0.0 && v.is_finite() {
            Ok(v as usize)
        } else {
            Err(TerrainError::Parse { line, message: format!("`{key}` must be a non-negative integer") })
        }
    };
    let ncols = as_count(header[0], 1, "ncols")?;
    let nrows = as_count(header[1], 2, "nrows")?;

    let mut elevations = Vec::with_capacity(ncols * nrows);
    let mut rows_read = 0;
    for (line, content) in lines {
        if content.trim().is_empty() {
            continue;
        }
        if rows_read == nrows {
            return Err(TerrainError::Parse { line, message: format!("more than {nrows} data rows") });
        }
        let before = elevations.len();
        for token in content.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| TerrainError::Parse { line, message: format!("non-numeric cell `{token}`") })?;
            elevations.push(v);
        }
        let got = elevations.len() - before;
        if got != ncols {
            return Err(TerrainError::Parse { line, message: format!("expected {ncols} values, found {got}") });
        }
        rows_read += 1;
    }
    if rows_read != nrows {
        return Err(TerrainError::Parse {
            line: text.lines().count(),
            message: format!("expected {nrows} data rows, found {rows_read}"),
        });
    }
    TerrainGrid::new(ncols, nrows, header[2], header[3], header[4], elevations)
}

const HARMONICS: usize = 8;

/// Peak-to-peak relief of a roughness-1 surface, as a fraction of the
/// shorter map side.
const RELIEF_FRACTION: f64 = 0.4;

/// Smooth synthetic terrain built from seeded low-frequency plane waves.
///
/// Elevations lie in `[0, roughness * RELIEF_FRACTION * min_side]`, so
/// `roughness == 0` gives a flat grid at zero.
pub fn generate_terrain(
    width: usize,
    height: usize,
    cellsize: f64,
    roughness: f64,
    seed: u64,
) -> Result<TerrainGrid, TerrainError> {
    if !(0.0..=1.0).contains(&roughness) {
        return Err(TerrainError::Invalid(format!("roughness must be in [0, 1], got {roughness}")));
    }
    if width < 2 || height < 2 {
        return Err(TerrainError::Invalid(format!("grid must be at least 2x2, got {width}x{height}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = (width.min(height) as f64) * cellsize;
    let waves: Vec<(f64, f64, f64, f64)> = (0..HARMONICS)
        .map(|_| {
            let dir: f64 = rng.random_range(0.0..TAU);
            let cycles: f64 = rng.random_range(0.5..3.0);
            let phase: f64 = rng.random_range(0.0..TAU);
            let k = TAU * cycles / extent;
            (k * dir.cos(), k * dir.sin(), phase, 1.0 / cycles)
        })
        .collect();
    let weight: f64 = waves.iter().map(|w| w.3).sum();
    let half_relief = 0.5 * roughness * RELIEF_FRACTION * extent;

    let mut elevations = Vec::with_capacity(width * height);
    for row in 0..height {
        let y = ((height - 1 - row) as f64 + 0.5) * cellsize;
        for col in 0..width {
            let x = (col as f64 + 0.5) * cellsize;
            let s: f64 = waves.iter().map(|&(kx, ky, ph, a)| a * (kx * x + ky * y + ph).sin()).sum();
            elevations.push(half_relief * (1.0 + s / weight));
        }
    }
    TerrainGrid::new(width, height, 0.0, 0.0, cellsize, elevations)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BY_TWO: &str = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n0 0\n0 0\n";

    #[test]
    fn loads_zero_grid() {
        let g = load_terrain(TWO_BY_TWO).unwrap();
        assert_eq!(g.elevations(), &[0.0; 4]);
    }

    #[test]
    fn short_row_is_rejected_with_line() {
        let text = "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n4 5\n";
        match load_terrain(text) {
            Err(TerrainError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_header_and_cells() {
        let bad_key = "cols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n0 0\n0 0\n";
        assert!(matches!(load_terrain(bad_key), Err(TerrainError::Parse { line: 1, .. })));
        let bad_cell = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n0 x\n0 0\n";
        assert!(matches!(load_terrain(bad_cell), Err(TerrainError::Parse { line: 6, .. })));
        let missing_row = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n0 0\n";
        assert!(matches!(load_terrain(missing_row), Err(TerrainError::Parse { .. })));
        let zero_cell = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 0\n0 0\n0 0\n";
        assert!(matches!(load_terrain(zero_cell), Err(TerrainError::Invalid(_))));
    }

    #[test]
    fn flat_grid_is_constant() {
        let g = TerrainGrid::flat(4, 3, 5.0, 10.0).unwrap();
        for (x, y) in [(0.0, 0.0), (7.3, 11.1), (20.0, 15.0), (12.5, 2.5)] {
            assert_eq!(g.elevation_at(x, y).unwrap(), 10.0);
        }
    }

    #[test]
    fn bilinear_at_cell_center() {
        // corners (0, 0, 0, 4): the midpoint of the four centers averages to 1
        let g = TerrainGrid::new(2, 2, 0.0, 0.0, 2.0, vec![0.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.elevation_at(2.0, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn nodes_return_stored_values() {
        let vals: Vec<f64> = (0..12).map(|v| v as f64 * 1.25 - 3.0).collect();
        let g = TerrainGrid::new(4, 3, 0.0, 0.0, 10.0, vals).unwrap();
        for row in 0..3 {
            for col in 0..4 {
                let (x, y) = g.cell_center(col, row);
                assert_eq!(g.elevation_at(x, y).unwrap(), g.get(col, row));
            }
        }
    }

    #[test]
    fn off_map_is_error() {
        let g = TerrainGrid::flat(2, 2, 1.0, 0.0).unwrap();
        assert!(matches!(g.elevation_at(-0.1, 0.5), Err(TerrainError::OutOfBounds { .. })));
        assert!(matches!(g.elevation_at(0.5, 2.01), Err(TerrainError::OutOfBounds { .. })));
        assert!(g.elevation_at(f64::NAN, 0.5).is_err());
        assert!(g.elevation_at(2.0, 2.0).is_ok());
    }

    #[test]
    fn generation_properties() {
        let flat = generate_terrain(10, 8, 5.0, 0.0, 3).unwrap();
        assert!(flat.elevations().iter().all(|&e| e == flat.elevations()[0]));
        let a = generate_terrain(20, 20, 5.0, 0.7, 11).unwrap();
        let b = generate_terrain(20, 20, 5.0, 0.7, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_terrain(20, 20, 5.0, 0.7, 1).unwrap();
        let d = generate_terrain(20, 20, 5.0, 0.7, 2).unwrap();
        assert!(c.elevations().iter().zip(d.elevations()).any(|(p, q)| p != q));
        assert!(generate_terrain(20, 20, 5.0, 1.5, 1).is_err());
    }

    #[test]
    fn five_by_five_round_trip() {
        let g = generate_terrain(5, 5, 3.5, 0.9, 77).unwrap();
        let text = g.to_text();
        let back = load_terrain(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
    }
}
