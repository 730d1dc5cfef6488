use super::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::Grid;
use serde::{Deserialize, Serialize};

/// Real function sampled on the nodes of a grid (row-major, axis 0
/// slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Set once a derivative used one-sided differences at the boundary.
    pub one_sided_boundary: bool,
}

#[derive(Serialize, Deserialize)]
struct GridFieldJson {
    #[serde(rename = "box")]
    bx: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::DimensionMismatch { expected: grid.n_nodes(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid field values must be finite".into()));
        }
        Ok(GridField { grid, values, one_sided_boundary: false })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let ns = grid.node_shape();
        let mut values = Vec::with_capacity(grid.n_nodes());
        let mut idx = vec![0usize; ns.len()];
        let mut x = vec![0.0; ns.len()];
        for _ in 0..grid.n_nodes() {
            for a in 0..ns.len() {
                x[a] = grid.lo[a] + idx[a] as f64 * grid.h(a);
            }
            values.push(f(&x));
            for a in (0..ns.len()).rev() {
                idx[a] += 1;
                if idx[a] < ns[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        GridField { grid: grid.clone(), values, one_sided_boundary: false }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        GridField { grid: grid.clone(), values: vec![c; grid.n_nodes()], one_sided_boundary: false }
    }

    fn strides(&self) -> Vec<usize> {
        let ns = self.grid.node_shape();
        let mut s = vec![1; ns.len()];
        for a in (0..ns.len().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * ns[a + 1];
        }
        s
    }

    /// Value at planar node `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node_index(i, j)]
    }

    /// Bilinear interpolation at a planar point (clamped to the box).
    pub fn interpolate(&self, x: [f64; 2]) -> f64 {
        let (n1, n2) = self.grid.n2();
        let u = ((x[0] - self.grid.lo[0]) / self.grid.h(0)).clamp(0.0, n1 as f64);
        let v = ((x[1] - self.grid.lo[1]) / self.grid.h(1)).clamp(0.0, n2 as f64);
        let i = (u.floor() as usize).min(n1 - 1);
        let j = (v.floor() as usize).min(n2 - 1);
        let (s, t) = (u - i as f64, v - j as f64);
        (1.0 - s) * (1.0 - t) * self.at(i, j)
            + s * (1.0 - t) * self.at(i + 1, j)
            + (1.0 - s) * t * self.at(i, j + 1)
            + s * t * self.at(i + 1, j + 1)
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GridFieldJson {
            bx: self.grid.flat_box(),
            shape: self.grid.shape.clone(),
            values: self.values.clone(),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: GridFieldJson = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        GridField::new(Grid::from_box(&j.bx, j.shape)?, j.values)
    }
}

impl CoefficientField for GridField {
    fn nvars(&self) -> usize {
        self.grid.dim()
    }

    fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    fn neg(&self) -> Self {
        GridField { values: self.values.iter().map(|v| -v).collect(), ..self.clone() }
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(GridField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            one_sided_boundary: self.one_sided_boundary || other.one_sided_boundary,
        })
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(GridField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            one_sided_boundary: self.one_sided_boundary || other.one_sided_boundary,
        })
    }

    /// Central differences inside, second-order one-sided differences on
    /// the two boundary layers of axis `k`.
    fn partial(&self, k: usize) -> Self {
        let ns = self.grid.node_shape();
        let st = self.strides()[k];
        let h = self.grid.h(k);
        let n = ns[k];
        let v = &self.values;
        let out = (0..v.len())
            .map(|idx| {
                let i = (idx / st) % n;
                if i == 0 {
                    (-3.0 * v[idx] + 4.0 * v[idx + st] - v[idx + 2 * st]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * v[idx] - 4.0 * v[idx - st] + v[idx - 2 * st]) / (2.0 * h)
                } else {
                    (v[idx + st] - v[idx - st]) / (2.0 * h)
                }
            })
            .collect();
        GridField { grid: self.grid.clone(), values: out, one_sided_boundary: true }
    }

    /// Tensor trapezoid over the nodes inside `region`.
    fn integrate(&self, region: &[(f64, f64)]) -> f64 {
        let ns = self.grid.node_shape();
        let d = ns.len();
        let mut idx = vec![0usize; d];
        let mut total = 0.0;
        for val in &self.values {
            let mut w = 1.0;
            for a in 0..d {
                let x = self.grid.lo[a] + idx[a] as f64 * self.grid.h(a);
                let (lo, hi) = region[a];
                let tol = 1e-9 * self.grid.h(a);
                if x < lo - tol || x > hi + tol {
                    w = 0.0;
                    break;
                }
                let edge = idx[a] == 0 || idx[a] == ns[a] - 1 || x < lo + tol || x > hi - tol;
                w *= if edge { 0.5 * self.grid.h(a) } else { self.grid.h(a) };
            }
            total += w * val;
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < ns[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        total
    }

    fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
