use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Axis-aligned box split into `shape[a]` equal cells along axis `a`.
///
/// Flat storage is row-major with axis 0 slowest. Cell-valued arrays hold
/// `prod(shape)` entries, node-valued arrays `prod(shape + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, shape: Vec<usize>) -> Result<Grid> {
        if lo.len() != hi.len() || lo.len() != shape.len() || lo.is_empty() {
            return Err(Error::InvalidArgument("box and shape dimensions differ".into()));
        }
        for a in 0..lo.len() {
            if !(lo[a] < hi[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::InvalidArgument(format!("axis {a}: need lo < hi")));
            }
            if shape[a] < 2 {
                return Err(Error::InvalidArgument(format!("axis {a}: need at least 2 cells")));
            }
        }
        Ok(Grid { lo, hi, shape })
    }

    /// Square planar grid `[lo, hi]^2` with `n` cells per side.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Grid> {
        Grid::new(vec![lo, lo], vec![hi, hi], vec![n, n])
    }

    /// From a flat `[lo1, hi1, lo2, hi2, ...]` box.
    pub fn from_box(bx: &[f64], shape: Vec<usize>) -> Result<Grid> {
        if bx.len() != 2 * shape.len() {
            return Err(Error::DimensionMismatch { expected: 2 * shape.len(), got: bx.len() });
        }
        Grid::new(bx.iter().step_by(2).cloned().collect(), bx.iter().skip(1).step_by(2).cloned().collect(), shape)
    }

    pub fn flat_box(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).flat_map(|(a, b)| [*a, *b]).collect()
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn h(&self, a: usize) -> f64 {
        (self.hi[a] - self.lo[a]) / self.shape[a] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.h(a)).product()
    }

    pub fn n_cells(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn n_nodes(&self) -> usize {
        self.shape.iter().map(|s| s + 1).product()
    }

    pub fn node_shape(&self) -> Vec<usize> {
        self.shape.iter().map(|s| s + 1).collect()
    }

    // planar helpers

    pub fn n2(&self) -> (usize, usize) {
        (self.shape[0], self.shape[1])
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.shape[1] + j
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * (self.shape[1] + 1) + j
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.lo[0] + (i as f64 + 0.5) * self.h(0), self.lo[1] + (j as f64 + 0.5) * self.h(1)]
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.lo[0] + i as f64 * self.h(0), self.lo[1] + j as f64 * self.h(1)]
    }

    /// Cell containing `x`, or `None` outside the closed box.
    pub fn cell_of(&self, x: [f64; 2]) -> Option<(usize, usize)> {
        let mut out = [0usize; 2];
        for a in 0..2 {
            if !(x[a] >= self.lo[a] && x[a] <= self.hi[a]) {
                return None;
            }
            let k = ((x[a] - self.lo[a]) / self.h(a)).floor() as usize;
            out[a] = k.min(self.shape[a] - 1);
        }
        Some((out[0], out[1]))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(a, v)| *v >= self.lo[a] && *v <= self.hi[a])
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diagonal(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}
