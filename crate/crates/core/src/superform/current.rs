use super::{CoefficientField, GridField, SuperForm, VolumeConvention};
use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::poly::Poly;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `(1,1)`-supercurrent `sum mu_jk dx_j (x) dx_k` given by per-cell masses.
///
/// `masses[j * m + k][cell]` is the mass of `mu_jk` in `cell`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperCurrent11 {
    pub grid: Grid,
    pub masses: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CurrentJson {
    #[serde(rename = "box")]
    bx: Vec<f64>,
    shape: Vec<usize>,
    masses: Vec<Vec<Vec<f64>>>,
}

impl SuperCurrent11 {
    pub fn zero(grid: &Grid) -> Self {
        let m = grid.dim();
        SuperCurrent11 { grid: grid.clone(), masses: vec![vec![0.0; grid.n_cells()]; m * m] }
    }

    pub fn new(grid: Grid, masses: Vec<Vec<f64>>) -> Result<Self> {
        let m = grid.dim();
        if masses.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: masses.len() });
        }
        for row in &masses {
            if row.len() != grid.n_cells() {
                return Err(Error::DimensionMismatch { expected: grid.n_cells(), got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("masses must be finite".into()));
            }
        }
        Ok(SuperCurrent11 { grid, masses })
    }

    /// Every cell carries the same matrix `per_cell` (row-major m x m).
    pub fn uniform(grid: &Grid, per_cell: &[f64]) -> Self {
        let m = grid.dim();
        assert_eq!(per_cell.len(), m * m);
        SuperCurrent11 { grid: grid.clone(), masses: per_cell.iter().map(|v| vec![*v; grid.n_cells()]).collect() }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn mass(&self, j: usize, k: usize) -> &[f64] {
        &self.masses[j * self.dim() + k]
    }

    /// Samples a polynomial `(1,1)`-form at cell centers, times cell volume.
    pub fn from_form<T: Scalar>(form: &SuperForm<Poly<T>>, grid: &Grid) -> Result<Self> {
        let m = grid.dim();
        if form.bidegree() != (1, 1) || form.dim() != m {
            let (p, q) = form.bidegree();
            return Err(Error::Bidegree { p, q, m: 1 });
        }
        let cells = cell_centers(grid);
        let vol = grid.cell_volume();
        let mut masses = vec![vec![0.0; grid.n_cells()]; m * m];
        for ((js, ks), f) in form.coefficients() {
            let j = js.trailing_zeros() as usize;
            let k = ks.trailing_zeros() as usize;
            let fd = f.to_f64();
            for (c, x) in cells.iter().enumerate() {
                masses[j * m + k][c] = fd.eval_f64(x) * vol;
            }
        }
        Ok(SuperCurrent11 { grid: grid.clone(), masses })
    }

    /// Sum of diagonal masses.
    pub fn trace_mass(&self) -> f64 {
        let m = self.dim();
        (0..m).map(|j| self.mass(j, j).iter().sum::<f64>()).sum()
    }

    /// Sum of absolute masses over all entries and cells.
    pub fn total_abs_mass(&self) -> f64 {
        self.masses.iter().flatten().map(|v| v.abs()).sum()
    }

    pub fn max_cell_mass(&self) -> f64 {
        self.masses.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let m = self.dim();
        let mut worst = 0.0f64;
        for j in 0..m {
            for k in j + 1..m {
                for (a, b) in self.mass(j, k).iter().zip(self.mass(k, j)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }

    /// `max |mu_jk - mu_kj| <= tol * max |mu|` over cells.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.max_cell_mass()
    }

    /// Action `T[phi]` on an `(m-1, m-1)`-form sampled at cell centers:
    /// `(-1)^{m(m-1)/2}` times the cell sum of the top coefficient of
    /// `T ^ phi`.
    pub fn pair(&self, phi: &SuperForm<GridField>) -> Result<f64> {
        let m = self.dim();
        let cgrid = cell_center_grid(&self.grid)?;
        let mut total = SuperForm::zero(m, m, m);
        for j in 0..m {
            for k in 0..m {
                let field = GridField { grid: cgrid.clone(), values: self.mass(j, k).to_vec(), one_sided_boundary: false };
                if field.is_zero() {
                    continue;
                }
                let t = SuperForm::term(m, &[j], &[k], field)?;
                total = total.add(&t.wedge(phi)?)?;
            }
        }
        let full = (1u32 << m) - 1;
        let s: f64 = total.coefficient(full, full).map_or(0.0, |g| g.values.iter().sum());
        Ok(VolumeConvention::sign(m) * s)
    }

    /// Pairs the current with `trials` random test forms
    /// `(-1)^{(m-p)(m-p-1)/2} beta ^ I(beta)`, `beta` of bidegree `(m-1, 0)`
    /// with a common bump profile and random unit coefficients; positive
    /// iff every pairing is at least `-tol * total_abs_mass`.
    pub fn is_positive(&self, trials: usize, tol: f64) -> Result<bool> {
        Ok(self.min_positivity_pairing(trials, 0x9051_7e11)? >= -tol * self.total_abs_mass())
    }

    /// Smallest pairing over the random test forms.
    pub fn min_positivity_pairing(&self, trials: usize, seed: u64) -> Result<f64> {
        let m = self.dim();
        let p = m - 1;
        let sign = if ((m - p) * (m - p).saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let cgrid = cell_center_grid(&self.grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        // basis of (m-1)-forms: complements of single indices
        let bases: Vec<Vec<usize>> = (0..m).map(|skip| (0..m).filter(|&a| a != skip).collect()).collect();
        for _ in 0..trials {
            let center: Vec<f64> = (0..m).map(|a| rng.gen_range(self.grid.lo[a]..self.grid.hi[a])).collect();
            let width: Vec<f64> = (0..m).map(|a| rng.gen_range(0.1..0.6) * (self.grid.hi[a] - self.grid.lo[a])).collect();
            let mut coef: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = coef.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
            coef.iter_mut().for_each(|c| *c /= n);
            let bump = GridField::from_fn(&cgrid, |x| {
                let r2: f64 = x.iter().zip(&center).zip(&width).map(|((a, b), w)| ((a - b) / w).powi(2)).sum();
                if r2 < 1.0 {
                    (-1.0 / (1.0 - r2)).exp() * std::f64::consts::E
                } else {
                    0.0
                }
            });
            let mut beta = SuperForm::zero(m, p, 0);
            for (b, c) in bases.iter().zip(&coef) {
                let f = GridField { values: bump.values.iter().map(|v| v * c).collect(), ..bump.clone() };
                beta = beta.add(&SuperForm::term(m, b, &[], f)?)?;
            }
            let phi = beta.wedge(&beta.involution())?;
            let v = sign * self.pair(&phi)?;
            worst = worst.min(v);
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> String {
        let m = self.dim();
        let masses = (0..m).map(|j| (0..m).map(|k| self.mass(j, k).to_vec()).collect()).collect();
        serde_json::to_string(&CurrentJson { bx: self.grid.flat_box(), shape: self.grid.shape.clone(), masses })
            .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CurrentJson = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let grid = Grid::from_box(&j.bx, j.shape)?;
        SuperCurrent11::new(grid, j.masses.into_iter().flatten().collect())
    }
}

/// Grid whose nodes are the cell centers of `g`.
pub(crate) fn cell_center_grid(g: &Grid) -> Result<Grid> {
    let m = g.dim();
    let lo = (0..m).map(|a| g.lo[a] + 0.5 * g.h(a)).collect();
    let hi = (0..m).map(|a| g.hi[a] - 0.5 * g.h(a)).collect();
    let shape = g.shape.iter().map(|s| s - 1).collect::<Vec<_>>();
    if shape.iter().any(|&s| s < 2) {
        return Err(Error::InvalidArgument("grid too coarse for cell-centered fields".into()));
    }
    Grid::new(lo, hi, shape)
}

fn cell_centers(g: &Grid) -> Vec<Vec<f64>> {
    let m = g.dim();
    let mut idx = vec![0usize; m];
    let mut out = Vec::with_capacity(g.n_cells());
    for _ in 0..g.n_cells() {
        out.push((0..m).map(|a| g.lo[a] + (idx[a] as f64 + 0.5) * g.h(a)).collect());
        for a in (0..m).rev() {
            idx[a] += 1;
            if idx[a] < g.shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}
