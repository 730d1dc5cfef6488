//! Convex potential of a closed, symmetric, positive (1,1)-current:
//! mollify, integrate each row one-form, integrate again.

use super::{GridField, SuperCurrent11};
use crate::error::{Error, Result};
use crate::geometry::Grid;
use rayon::prelude::*;
use serde::Serialize;

const LS_TOL: f64 = 1e-12;
const LS_MAX_ITER: usize = 20_000;

/// Tolerances for [`potential_from_current_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialOptions {
    /// Mollifier radius in cells (at least 2).
    pub eps: f64,
    pub symmetry_tol: f64,
    /// Path-independence residual on nodes at least `margin()` cells
    /// inside the box, relative to total trace mass per unit length.
    pub closedness_tol: f64,
    /// Most negative admissible grid second difference of the potential,
    /// divided by the largest one, over nodes at least `margin()` cells
    /// inside the box.
    pub convexity_tol: f64,
}

impl PotentialOptions {
    /// Nodes this close to the boundary see the renormalized mollifier
    /// stencil, which is neither closed nor convexity-preserving; the
    /// closedness and convexity checks skip them.
    pub fn margin(&self) -> usize {
        self.eps.ceil() as usize + 2
    }
}

impl Default for PotentialOptions {
    fn default() -> Self {
        PotentialOptions { eps: 3.0, symmetry_tol: 1e-6, closedness_tol: 1e-6, convexity_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialReport {
    pub potential: GridField,
    /// Mollified densities `h_jk` at nodes, row-major `j * 2 + k`.
    pub densities: Vec<GridField>,
    pub path_residual: f64,
    pub reconstruction_error: f64,
    pub min_second_difference: f64,
    pub options: PotentialOptions,
}

/// Recovers `R` with `d'd''R` equal to the mollified current, normalized
/// by `R(c) = 0` and `grad R(c) = 0` at the central node.
pub fn potential_from_current(s: &SuperCurrent11, eps: f64) -> Result<GridField> {
    let opts = PotentialOptions { eps, ..Default::default() };
    Ok(potential_from_current_with(s, &opts)?.potential)
}

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Node densities of each mass array, mollified with the radial bump of
/// radius `eps` cells and renormalized over the cells inside the grid.
fn mollify(grid: &Grid, masses: &[Vec<f64>], eps: f64) -> Vec<Vec<f64>> {
    let (n1, n2) = grid.n2();
    let vol = grid.cell_volume();
    let r = eps.ceil() as i64 + 1;
    let nodes = (n1 + 1) * (n2 + 1);
    let rows: Vec<Vec<Vec<f64>>> = (0..=n1)
        .into_par_iter()
        .map(|a| {
            let mut out = vec![vec![0.0; n2 + 1]; masses.len()];
            for b in 0..=n2 {
                let mut wsum = 0.0;
                let mut acc = vec![0.0; masses.len()];
                for di in -r..r {
                    let ci = a as i64 + di;
                    if ci < 0 || ci >= n1 as i64 {
                        continue;
                    }
                    for dj in -r..r {
                        let cj = b as i64 + dj;
                        if cj < 0 || cj >= n2 as i64 {
                            continue;
                        }
                        // cell center sits half a cell past the node offset
                        let (u, v) = ((di as f64 + 0.5) / eps, (dj as f64 + 0.5) / eps);
                        let w = bump(u * u + v * v);
                        if w == 0.0 {
                            continue;
                        }
                        wsum += w;
                        let c = ci as usize * n2 + cj as usize;
                        for (t, m) in masses.iter().enumerate() {
                            acc[t] += w * m[c];
                        }
                    }
                }
                for t in 0..masses.len() {
                    out[t][b] = if wsum > 0.0 { acc[t] / (wsum * vol) } else { 0.0 };
                }
            }
            out
        })
        .collect();
    let mut flat = vec![vec![0.0; nodes]; masses.len()];
    for (a, row) in rows.into_iter().enumerate() {
        for (t, vals) in row.into_iter().enumerate() {
            flat[t][a * (n2 + 1)..(a + 1) * (n2 + 1)].copy_from_slice(&vals);
        }
    }
    flat
}

/// Trapezoid primitive of the one-form `f1 dx1 + f2 dx2` from the node
/// `(c1, c2)`, along x1 first (`x1_first`) or x2 first.
fn primitive(grid: &Grid, f1: &[f64], f2: &[f64], x1_first: bool) -> Vec<f64> {
    let (n1, n2) = grid.n2();
    let (c1, c2) = (n1 / 2, n2 / 2);
    let (h1, h2) = (grid.h(0), grid.h(1));
    let idx = |i: usize, j: usize| i * (n2 + 1) + j;
    let mut g = vec![0.0; (n1 + 1) * (n2 + 1)];
    let step1 = |g: &mut Vec<f64>, j: usize| {
        for i in c1 + 1..=n1 {
            g[idx(i, j)] = g[idx(i - 1, j)] + 0.5 * h1 * (f1[idx(i - 1, j)] + f1[idx(i, j)]);
        }
        for i in (0..c1).rev() {
            g[idx(i, j)] = g[idx(i + 1, j)] - 0.5 * h1 * (f1[idx(i + 1, j)] + f1[idx(i, j)]);
        }
    };
    let step2 = |g: &mut Vec<f64>, i: usize| {
        for j in c2 + 1..=n2 {
            g[idx(i, j)] = g[idx(i, j - 1)] + 0.5 * h2 * (f2[idx(i, j - 1)] + f2[idx(i, j)]);
        }
        for j in (0..c2).rev() {
            g[idx(i, j)] = g[idx(i, j + 1)] - 0.5 * h2 * (f2[idx(i, j + 1)] + f2[idx(i, j)]);
        }
    };
    if x1_first {
        step1(&mut g, c2);
        for i in 0..=n1 {
            step2(&mut g, i);
        }
    } else {
        step2(&mut g, c1);
        for j in 0..=n2 {
            step1(&mut g, j);
        }
    }
    g
}

/// Least-squares primitive: minimizes the squared mismatch between the
/// node differences of `u` and the trapezoid edge integrals of
/// `f1 dx1 + f2 dx2`. Solved by conjugate gradients on the Neumann graph
/// Laplacian, starting from `init`. Local non-closedness and noise stay
/// local instead of propagating along integration paths.
fn primitive_least_squares(grid: &Grid, f1: &[f64], f2: &[f64], init: Vec<f64>) -> Vec<f64> {
    let (n1, n2) = grid.n2();
    let (h1, h2) = (grid.h(0), grid.h(1));
    let idx = |i: usize, j: usize| i * (n2 + 1) + j;
    let nodes = (n1 + 1) * (n2 + 1);
    // weights 1/h^2 make the energy a discretization of |grad u - f|^2
    let (w1, w2) = (1.0 / (h1 * h1), 1.0 / (h2 * h2));
    let mut b = vec![0.0; nodes];
    for i in 0..=n1 {
        for j in 0..=n2 {
            if i < n1 {
                let e = w1 * 0.5 * h1 * (f1[idx(i, j)] + f1[idx(i + 1, j)]);
                b[idx(i + 1, j)] += e;
                b[idx(i, j)] -= e;
            }
            if j < n2 {
                let e = w2 * 0.5 * h2 * (f2[idx(i, j)] + f2[idx(i, j + 1)]);
                b[idx(i, j + 1)] += e;
                b[idx(i, j)] -= e;
            }
        }
    }
    let apply = |u: &[f64], out: &mut [f64]| {
        out.par_chunks_mut(n2 + 1).enumerate().for_each(|(i, row)| {
            for (j, o) in row.iter_mut().enumerate() {
                let c = u[idx(i, j)];
                let mut acc = 0.0;
                if i > 0 {
                    acc += w1 * (c - u[idx(i - 1, j)]);
                }
                if i < n1 {
                    acc += w1 * (c - u[idx(i + 1, j)]);
                }
                if j > 0 {
                    acc += w2 * (c - u[idx(i, j - 1)]);
                }
                if j < n2 {
                    acc += w2 * (c - u[idx(i, j + 1)]);
                }
                *o = acc;
            }
        });
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut u = init;
    let mut au = vec![0.0; nodes];
    apply(&u, &mut au);
    let mut r: Vec<f64> = b.iter().zip(&au).map(|(x, y)| x - y).collect();
    let mean = r.iter().sum::<f64>() / nodes as f64;
    r.iter_mut().for_each(|v| *v -= mean);
    let bnorm = dot(&b, &b).sqrt().max(f64::MIN_POSITIVE);
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; nodes];
    for _ in 0..LS_MAX_ITER {
        if rr.sqrt() <= LS_TOL * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..nodes {
            u[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..nodes {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    u
}

/// Most negative second difference of `r` along the axes and diagonals,
/// over nodes at least `margin` (minimum 1) nodes inside the box, divided
/// by the largest one when that is positive.
pub fn min_second_difference(f: &GridField, margin: usize) -> f64 {
    let (n1, n2) = f.grid.n2();
    let m = margin.max(1);
    let mut worst = f64::INFINITY;
    let mut peak = 0.0f64;
    for i in m..=n1.saturating_sub(m) {
        for j in m..=n2.saturating_sub(m) {
            let c = 2.0 * f.at(i, j);
            let d = [
                f.at(i + 1, j) + f.at(i - 1, j) - c,
                f.at(i, j + 1) + f.at(i, j - 1) - c,
                f.at(i + 1, j + 1) + f.at(i - 1, j - 1) - c,
                f.at(i + 1, j - 1) + f.at(i - 1, j + 1) - c,
            ];
            for v in d {
                worst = worst.min(v);
                peak = peak.max(v);
            }
        }
    }
    if worst.is_finite() && peak > 0.0 {
        worst / peak
    } else if worst.is_finite() {
        worst
    } else {
        0.0
    }
}

pub fn potential_from_current_with(s: &SuperCurrent11, opts: &PotentialOptions) -> Result<PotentialReport> {
    if s.dim() != 2 {
        return Err(Error::Unsupported("potential recovery is implemented for m = 2".into()));
    }
    if opts.eps < 2.0 {
        return Err(Error::InvalidArgument("mollifier radius must be at least 2 cells".into()));
    }
    if !s.is_symmetric(opts.symmetry_tol) {
        return Err(Error::NotSymmetric { asymmetry: s.asymmetry() });
    }
    let grid = &s.grid;
    let (n1, n2) = grid.n2();
    let h = mollify(grid, &s.masses, opts.eps);
    // symmetrize exactly; the check above bounds what this discards
    let h12: Vec<f64> = h[1].iter().zip(&h[2]).map(|(a, b)| 0.5 * (a + b)).collect();
    let (h11, h22) = (&h[0], &h[3]);

    let g1a = primitive(grid, h11, &h12, true);
    let g2a = primitive(grid, &h12, h22, true);
    let g1b = primitive(grid, h11, &h12, false);
    let g2b = primitive(grid, &h12, h22, false);
    let margin = opts.margin();
    let mut diff = 0.0f64;
    for i in margin..=n1.saturating_sub(margin) {
        for j in margin..=n2.saturating_sub(margin) {
            let k = i * (n2 + 1) + j;
            diff = diff.max((g1a[k] - g1b[k]).abs()).max((g2a[k] - g2b[k]).abs());
        }
    }
    let mass = s.trace_mass().abs();
    let side = (grid.hi[0] - grid.lo[0]).min(grid.hi[1] - grid.lo[1]);
    let path_residual = if mass > 0.0 { diff / (mass / side) } else { diff };

    let g1 = primitive_least_squares(grid, h11, &h12, g1a);
    let g2 = primitive_least_squares(grid, &h12, h22, g2a);
    let r0 = primitive(grid, &g1, &g2, true);
    let mut r = primitive_least_squares(grid, &g1, &g2, r0);
    let (ci, cj) = (n1 / 2, n2 / 2);
    let idx = |i: usize, j: usize| i * (n2 + 1) + j;
    let v0 = r[idx(ci, cj)];
    let d1 = (r[idx(ci + 1, cj)] - r[idx(ci - 1, cj)]) / (2.0 * grid.h(0));
    let d2 = (r[idx(ci, cj + 1)] - r[idx(ci, cj - 1)]) / (2.0 * grid.h(1));
    let c = grid.node(ci, cj);
    for i in 0..=n1 {
        for j in 0..=n2 {
            let x = grid.node(i, j);
            r[idx(i, j)] -= v0 + d1 * (x[0] - c[0]) + d2 * (x[1] - c[1]);
        }
    }
    let potential = GridField::new(grid.clone(), r)?;
    let densities: Vec<GridField> = [h11.clone(), h12.clone(), h12.clone(), h22.clone()]
        .into_iter()
        .map(|v| GridField::new(grid.clone(), v))
        .collect::<Result<_>>()?;
    let reconstruction_error = reconstruction_error(&potential, &densities);
    let min_sd = min_second_difference(&potential, margin);

    if path_residual > opts.closedness_tol {
        return Err(Error::NotClosed { residual: path_residual, tol: opts.closedness_tol });
    }
    if min_sd < -opts.convexity_tol {
        return Err(Error::NotConvex { defect: min_sd, tol: opts.convexity_tol });
    }
    Ok(PotentialReport {
        potential,
        densities,
        path_residual,
        reconstruction_error,
        min_second_difference: min_sd,
        options: *opts,
    })
}

/// Relative L1 distance between the grid Hessian of `r` and the target
/// densities over interior nodes.
pub fn reconstruction_error(r: &GridField, h: &[GridField]) -> f64 {
    let g = &r.grid;
    let (n1, n2) = g.n2();
    let (a, b) = (g.h(0), g.h(1));
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..n1 {
        for j in 1..n2 {
            let d11 = (r.at(i + 1, j) - 2.0 * r.at(i, j) + r.at(i - 1, j)) / (a * a);
            let d22 = (r.at(i, j + 1) - 2.0 * r.at(i, j) + r.at(i, j - 1)) / (b * b);
            let d12 = (r.at(i + 1, j + 1) - r.at(i + 1, j - 1) - r.at(i - 1, j + 1) + r.at(i - 1, j - 1)) / (4.0 * a * b);
            let t = [h[0].at(i, j), h[1].at(i, j), h[2].at(i, j), h[3].at(i, j)];
            let d = [d11, d12, d12, d22];
            for k in 0..4 {
                num += (d[k] - t[k]).abs();
                den += t[k].abs();
            }
        }
    }
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_current_gives_quadratic() {
        let g = Grid::square(-1.0, 1.0, 64).unwrap();
        let vol = g.cell_volume();
        let s = SuperCurrent11::uniform(&g, &[vol, 0.0, 0.0, vol]);
        let rep = potential_from_current_with(&s, &PotentialOptions::default()).unwrap();
        let want = GridField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
        let rms = (rep.potential.values.iter().zip(&want.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            / want.values.len() as f64)
            .sqrt();
        assert!(rms <= 1e-2, "rms {rms}");
        assert!(rep.path_residual <= 1e-6);
        assert!(rep.reconstruction_error < 1e-9);
    }

    #[test]
    fn zero_current_gives_zero() {
        let g = Grid::square(-1.0, 1.0, 16).unwrap();
        let f = potential_from_current(&SuperCurrent11::zero(&g), 3.0).unwrap();
        assert!(f.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_asymmetric_and_small_radius() {
        let g = Grid::square(-1.0, 1.0, 16).unwrap();
        let s = SuperCurrent11::uniform(&g, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(potential_from_current(&s, 3.0), Err(Error::NotSymmetric { .. })));
        assert!(potential_from_current(&SuperCurrent11::zero(&g), 1.0).is_err());
    }

    #[test]
    fn indefinite_current_is_flagged_nonconvex() {
        let g = Grid::square(-1.0, 1.0, 16).unwrap();
        let s = SuperCurrent11::uniform(&g, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(potential_from_current(&s, 3.0), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn curl_is_detected() {
        // mu_11 growing in x2 with no matching mu_12 is not closed
        let g = Grid::square(-1.0, 1.0, 32).unwrap();
        let mut s = SuperCurrent11::zero(&g);
        for i in 0..32 {
            for j in 0..32 {
                let x = g.cell_center(i, j);
                s.masses[0][g.cell_index(i, j)] = (2.0 + x[1]) * g.cell_volume();
                s.masses[3][g.cell_index(i, j)] = g.cell_volume();
            }
        }
        assert!(matches!(potential_from_current(&s, 3.0), Err(Error::NotClosed { .. })));
    }
}
