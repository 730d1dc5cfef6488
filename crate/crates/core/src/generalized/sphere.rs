use crate::error::{Error, Result};
use crate::geometry::{Cone, Fan};
use num_complex::Complex64;
use serde::Serialize;

/// Minimum separation of marked points.
pub const MIN_SEPARATION: f64 = 1e-9;
/// `log_map` refuses points this close to a marked point.
pub const POLE_GUARD: f64 = 1e-12;

/// The Riemann sphere with finite marked points `p_k` and the meromorphic
/// differentials `omega_j = sum_k a_jk dz / (z - p_k)`. Infinity is an
/// implicit extra marked point carrying residue `-sum_k a_jk`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedSphere {
    pub points: Vec<Complex64>,
    /// `residues[j][k]`: residue of `omega_j` at `points[k]`.
    pub residues: Vec<Vec<f64>>,
    pub base_point: Complex64,
}

pub fn build_marked_sphere(points: Vec<Complex64>, residues: Vec<Vec<f64>>, base_point: Complex64) -> Result<MarkedSphere> {
    if residues.is_empty() {
        return Err(Error::InvalidSphere("need at least one differential".into()));
    }
    for (j, row) in residues.iter().enumerate() {
        if row.len() != points.len() {
            return Err(Error::InvalidSphere(format!(
                "residue row {} has {} entries for {} points",
                j + 1,
                row.len(),
                points.len()
            )));
        }
        if row.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidSphere("residues must be finite reals".into()));
        }
    }
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) || !base_point.re.is_finite() || !base_point.im.is_finite()
    {
        return Err(Error::InvalidSphere("points must be finite".into()));
    }
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            if (p - q).norm() <= MIN_SEPARATION {
                return Err(Error::InvalidSphere(format!("coincident marked points {p} and {q}")));
            }
        }
        if (p - base_point).norm() <= MIN_SEPARATION {
            return Err(Error::InvalidSphere(format!("base point lies on marked point {p}")));
        }
    }
    Ok(MarkedSphere { points, residues, base_point })
}

/// Rank data at one point; see [`MarkedSphere::jacobian_rank`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub dim_l: usize,
    pub dim_l_cap_conj: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanRay {
    /// `p1`, `p2`, ... or `inf`.
    pub label: String,
    pub ray: Vec<f64>,
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanReport {
    pub rays: Vec<FanRay>,
    pub all_zero: bool,
}

impl FanReport {
    pub fn fan(&self) -> Fan {
        let m = self.rays.first().map_or(0, |r| r.ray.len());
        Fan { cones: self.rays.iter().filter(|r| !r.zero).map(|r| Cone::new(m, vec![r.ray.clone()])).collect() }
    }

    /// Points along every nonzero planar ray, `spacing` apart, inside the
    /// box `[lo1, hi1, lo2, hi2]`; includes the origin when it is inside.
    pub fn support_sample(&self, bx: [f64; 4], spacing: f64) -> Vec<[f64; 2]> {
        let inside = |p: [f64; 2]| p[0] >= bx[0] && p[0] <= bx[1] && p[1] >= bx[2] && p[1] <= bx[3];
        let reach = bx.iter().map(|v| v.abs()).fold(0.0, f64::max) * 2f64.sqrt();
        let mut out = Vec::new();
        if inside([0.0, 0.0]) {
            out.push([0.0, 0.0]);
        }
        for r in self.rays.iter().filter(|r| !r.zero) {
            let n = r.ray[0].hypot(r.ray[1]);
            let u = [r.ray[0] / n, r.ray[1] / n];
            let steps = (reach / spacing).ceil() as usize;
            for k in 1..=steps {
                let p = [u[0] * k as f64 * spacing, u[1] * k as f64 * spacing];
                if inside(p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nondegeneracy {
    /// Some `omega_j` is not identically zero.
    pub nondegenerate: bool,
    pub fan_dim: usize,
    /// The two criteria agree (`nondegenerate` iff `fan_dim == 1`).
    pub consistent: bool,
}

impl MarkedSphere {
    pub fn dim(&self) -> usize {
        self.residues.len()
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Residue of each `omega_j` at infinity.
    pub fn residue_at_infinity(&self) -> Vec<f64> {
        self.residues.iter().map(|r| -r.iter().sum::<f64>()).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.residues.iter().all(|r| r.iter().all(|a| *a == 0.0))
    }

    /// Residues scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> MarkedSphere {
        MarkedSphere {
            residues: self.residues.iter().map(|r| r.iter().map(|a| a * lambda).collect()).collect(),
            ..self.clone()
        }
    }

    /// Same curve with another base point.
    pub fn with_base_point(&self, z0: Complex64) -> Result<MarkedSphere> {
        build_marked_sphere(self.points.clone(), self.residues.clone(), z0)
    }

    /// Smallest distance between two marked points (infinite for s < 2).
    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (a, p) in self.points.iter().enumerate() {
            for q in &self.points[a + 1..] {
                d = d.min((p - q).norm());
            }
        }
        d
    }

    /// `dz`-coefficients `g_j(z) = sum_k a_jk / (z - p_k)`.
    pub fn g(&self, z: Complex64) -> Vec<Complex64> {
        self.g_local(z, None)
    }

    /// `z - p_k`, exact when `local = Some((k, z - p_k))`: near a marked
    /// point far from the origin, `z` itself cannot resolve the offset.
    fn diff(&self, z: Complex64, local: Option<(usize, Complex64)>, k: usize) -> Complex64 {
        match local {
            Some((j, d)) if j == k => d,
            _ => z - self.points[k],
        }
    }

    pub(crate) fn g_local(&self, z: Complex64, local: Option<(usize, Complex64)>) -> Vec<Complex64> {
        let inv: Vec<Complex64> = (0..self.points.len()).map(|k| self.diff(z, local, k).inv()).collect();
        self.residues.iter().map(|row| row.iter().zip(&inv).map(|(a, v)| v * a).sum()).collect()
    }

    /// `x_j = sum_k a_jk log|z0 - p_k|`, the base-point constant.
    pub fn offset(&self) -> Vec<f64> {
        let l: Vec<f64> = self.points.iter().map(|p| (self.base_point - p).norm().ln()).collect();
        self.residues.iter().map(|row| row.iter().zip(&l).map(|(a, v)| a * v).sum()).collect()
    }

    /// `Log(z)_j = sum_k a_jk (log|z - p_k| - log|z0 - p_k|)`.
    pub fn log_map(&self, z: Complex64) -> Result<Vec<f64>> {
        let mut l = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let d = (z - p).norm();
            if d <= POLE_GUARD {
                return Err(Error::NearMarkedPoint(d));
            }
            l.push(d.ln());
        }
        let c = self.offset();
        Ok(self.residues.iter().zip(c).map(|(row, c)| row.iter().zip(&l).map(|(a, v)| a * v).sum::<f64>() - c).collect())
    }

    /// Planar `log_map` without the guard, for hot loops.
    pub(crate) fn log_map2(&self, z: Complex64, local: Option<(usize, Complex64)>, offset: [f64; 2]) -> [f64; 2] {
        let mut x = [-offset[0], -offset[1]];
        for k in 0..self.points.len() {
            let l = self.diff(z, local, k).norm().ln();
            x[0] += self.residues[0][k] * l;
            x[1] += self.residues[1][k] * l;
        }
        x
    }

    /// Rank of `d Log` at `z` as `2 dim L - dim (L cap conj L)` with
    /// `L = C phi(z)`, `phi = (g_1, ..., g_m)`.
    pub fn jacobian_rank(&self, z: Complex64) -> Result<RankReport> {
        for p in &self.points {
            if (z - p).norm() <= POLE_GUARD {
                return Err(Error::NearMarkedPoint((z - p).norm()));
            }
        }
        let phi = self.g(z);
        let scale: f64 = self.points.iter().map(|p| (z - p).norm().recip()).sum::<f64>()
            * self.residues.iter().flatten().map(|a| a.abs()).fold(0.0, f64::max);
        let n2: f64 = phi.iter().map(|v| v.norm_sqr()).sum();
        if n2.sqrt() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Ok(RankReport { rank: 0, dim_l: 0, dim_l_cap_conj: 0 });
        }
        // conj(phi) in C phi iff phi is a complex multiple of a real vector
        let mut real_line = true;
        for j in 0..phi.len() {
            for k in j + 1..phi.len() {
                if (phi[j] * phi[k].conj()).im.abs() > 1e-9 * n2 {
                    real_line = false;
                }
            }
        }
        let cap = usize::from(real_line);
        Ok(RankReport { rank: 2 - cap, dim_l: 1, dim_l_cap_conj: cap })
    }

    pub fn asymptotic_fan(&self) -> FanReport {
        let m = self.dim();
        let mut rays: Vec<FanRay> = (0..self.n_points())
            .map(|k| {
                let ray: Vec<f64> = (0..m).map(|j| -self.residues[j][k] + 0.0).collect();
                FanRay { label: format!("p{}", k + 1), zero: ray.iter().all(|v| *v == 0.0), ray }
            })
            .collect();
        let inf: Vec<f64> = self.residues.iter().map(|r| r.iter().sum::<f64>() + 0.0).collect();
        rays.push(FanRay { label: "inf".into(), zero: inf.iter().all(|v| *v == 0.0), ray: inf });
        let all_zero = rays.iter().all(|r| r.zero);
        FanReport { rays, all_zero }
    }

    pub fn nondegeneracy(&self) -> Nondegeneracy {
        let nondegenerate = self.residues.iter().any(|r| r.iter().any(|a| *a != 0.0));
        let fan_dim = usize::from(self.asymptotic_fan().rays.iter().any(|r| !r.zero));
        Nondegeneracy { nondegenerate, fan_dim, consistent: nondegenerate == (fan_dim == 1) }
    }
}

/// Singular values of the central-difference Jacobian of `log_map` with
/// respect to `(Re z, Im z)`, largest first.
pub fn numeric_jacobian_singular_values(ms: &MarkedSphere, z: Complex64, h: f64) -> Result<[f64; 2]> {
    let d = |dz: Complex64| -> Result<Vec<f64>> {
        let a = ms.log_map(z + dz)?;
        let b = ms.log_map(z - dz)?;
        Ok(a.iter().zip(&b).map(|(p, q)| (p - q) / (2.0 * h)).collect())
    };
    let ju = d(Complex64::new(h, 0.0))?;
    let jv = d(Complex64::new(0.0, h))?;
    // eigenvalues of the 2x2 Gram matrix J^T J
    let a: f64 = ju.iter().map(|v| v * v).sum();
    let c: f64 = jv.iter().map(|v| v * v).sum();
    let b: f64 = ju.iter().zip(&jv).map(|(p, q)| p * q).sum();
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = (a * c - b * b) / l1.max(f64::MIN_POSITIVE);
    Ok([l1.max(0.0).sqrt(), l2.max(0.0).sqrt()])
}

/// Rank of the finite-difference Jacobian with relative singular-value
/// threshold `rel`.
pub fn numeric_jacobian_rank(ms: &MarkedSphere, z: Complex64, h: f64, rel: f64) -> Result<usize> {
    let s = numeric_jacobian_singular_values(ms, z, h)?;
    if s[0] <= f64::MIN_POSITIVE {
        return Ok(0);
    }
    Ok(s.iter().filter(|v| **v > rel * s[0]).count())
}
