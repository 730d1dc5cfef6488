//! Stratified area sampling of the punctured plane: log-polar disks around
//! each marked point, a jittered grid over the middle disk and a log-polar
//! far-field annulus.

use super::MarkedSphere;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Default radius of the excluded disk around each marked point.
pub const DEFAULT_DELTA: f64 = 1e-3;
const CHUNK: usize = 1 << 15;
const PROBE_ANGLES: usize = 64;
/// Far-field radius cap, as a multiple of the middle radius, when the
/// residue at infinity vanishes and the far field maps to a point.
const FAR_CAP: f64 = 65536.0;
/// Absolute far-field cap; keeps the `r^2` weights finite.
const FAR_MAX: f64 = 1e150;
const DELTA_FLOOR: f64 = 1e-280;

/// Sample point `z` with area weight `w`. Samples drawn around marked
/// point `k` carry `local = Some((k, z - p_k))` at full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub z: Complex64,
    pub w: f64,
    pub local: Option<(usize, Complex64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogAnnulus {
    pub center: [f64; 2],
    pub inner: f64,
    pub outer: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingPlan {
    /// One annulus `inner < |z - p_k| < outer` per marked point.
    pub disks: Vec<LogAnnulus>,
    pub middle_center: [f64; 2],
    pub middle_radius: f64,
    /// Jittered grid side count over the middle disk's bounding square.
    pub middle_side: usize,
    pub far: LogAnnulus,
}

fn cplx(c: [f64; 2]) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn outside(ms: &MarkedSphere, offset: [f64; 2], bx: [f64; 4], center: Complex64, pole: Option<usize>, r: f64) -> bool {
    (0..PROBE_ANGLES).all(|a| {
        let d = Complex64::from_polar(r, TAU * (a as f64 + 0.5) / PROBE_ANGLES as f64);
        let x = ms.log_map2(center + d, pole.map(|k| (k, d)), offset);
        x[0] < bx[0] || x[0] > bx[1] || x[1] < bx[2] || x[1] > bx[3]
    })
}

impl SamplingPlan {
    /// Splits `samples` as 40% middle, 40% over the marked-point disks
    /// and 20% far field. Excluded disks start at `delta` and shrink until
    /// their boundary maps outside `bx`; the far radius doubles until the
    /// circle maps outside `bx`.
    pub fn new(ms: &MarkedSphere, samples: usize, delta: f64, bx: [f64; 4]) -> SamplingPlan {
        let off = ms.offset();
        let offset = [off[0], off.get(1).copied().unwrap_or(0.0)];
        let s = ms.n_points();
        let c = if s == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            ms.points.iter().sum::<Complex64>() / s as f64
        };
        let sep = ms.min_separation();
        let r_disk = 0.5f64.min(0.4 * sep);
        let middle_radius = ms.points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max) + 1.0;
        let n_disk = if s == 0 { 0 } else { (0.4 * samples as f64 / s as f64) as usize };
        let n_far = samples / 5;
        let n_mid = samples.saturating_sub(n_disk * s + n_far);
        let disks = ms
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let pole = ms.residues.iter().any(|row| row[k] != 0.0);
                let mut inner = delta.min(0.5 * r_disk);
                while pole && inner > DELTA_FLOOR && !outside(ms, offset, bx, *p, Some(k), inner) {
                    inner *= 0.5;
                }
                LogAnnulus { center: [p.re, p.im], inner, outer: r_disk, count: n_disk }
            })
            .collect();
        let cap = if ms.residue_at_infinity().iter().all(|v| *v == 0.0) { FAR_CAP * middle_radius } else { FAR_MAX };
        let mut outer = 2.0 * middle_radius;
        while outer < cap && !outside(ms, offset, bx, c, None, outer) {
            outer *= 2.0;
        }
        let middle_side = ((4.0 * n_mid as f64 / std::f64::consts::PI).sqrt().ceil() as usize).max(1);
        SamplingPlan {
            disks,
            middle_center: [c.re, c.im],
            middle_radius,
            middle_side,
            far: LogAnnulus { center: [c.re, c.im], inner: middle_radius, outer, count: n_far },
        }
    }

    pub fn total(&self) -> usize {
        self.disks.iter().map(|d| d.count).sum::<usize>() + self.middle_side * self.middle_side + self.far.count
    }

    /// All samples, in a fixed order independent of the thread count.
    /// `replicate` selects an independent stream family.
    pub fn samples(&self, seed: u64, replicate: u64) -> Vec<Sample> {
        // (stratum, first index, count)
        let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
        let strata = self.disks.len() + 2;
        for st in 0..strata {
            let n = if st < self.disks.len() {
                self.disks[st].count
            } else if st == self.disks.len() {
                self.middle_side * self.middle_side
            } else {
                self.far.count
            };
            let mut a = 0;
            while a < n {
                jobs.push((st, a, CHUNK.min(n - a)));
                a += CHUNK;
            }
        }
        jobs.par_iter()
            .map(|&(st, first, n)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((replicate << 48) | ((st as u64) << 32) | (first / CHUNK) as u64);
                let mut out = Vec::with_capacity(n);
                if st < self.disks.len() {
                    log_polar(&self.disks[st], Some(st), n, &mut rng, &mut out);
                } else if st == self.disks.len() {
                    self.middle(first, n, &mut rng, &mut out);
                } else {
                    log_polar(&self.far, None, n, &mut rng, &mut out);
                }
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    fn middle(&self, first: usize, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Sample>) {
        let k = self.middle_side;
        let side = 2.0 * self.middle_radius / k as f64;
        let c = cplx(self.middle_center);
        let lo = c - Complex64::new(self.middle_radius, self.middle_radius);
        for idx in first..first + n {
            let (i, j) = (idx / k, idx % k);
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let z = lo + Complex64::new((i as f64 + u) * side, (j as f64 + v) * side);
            if (z - c).norm() > self.middle_radius {
                continue;
            }
            if self.disks.iter().any(|d| (z - cplx(d.center)).norm() < d.outer) {
                continue;
            }
            out.push(Sample { z, w: side * side, local: None });
        }
    }
}

/// `u = log r` uniform on `[log inner, log outer]`, angle uniform; the
/// area element `r dr dt = r^2 du dt` gives the weight.
fn log_polar(a: &LogAnnulus, pole: Option<usize>, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Sample>) {
    if n == 0 || a.outer <= a.inner {
        return;
    }
    let (l0, l1) = (a.inner.ln(), a.outer.ln());
    let c = cplx(a.center);
    let scale = (l1 - l0) * TAU / a.count as f64;
    for _ in 0..n {
        let u = l0 + (l1 - l0) * rng.gen::<f64>();
        let t = TAU * rng.gen::<f64>();
        let r = u.exp();
        let d = Complex64::from_polar(r, t);
        out.push(Sample { z: c + d, w: r * r * scale, local: pole.map(|k| (k, d)) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generalized::build_marked_sphere;

    fn ms1() -> MarkedSphere {
        let c = Complex64::new;
        build_marked_sphere(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![vec![1.0, 0.0], vec![0.0, 1.0]], c(-1.0, 0.0)).unwrap()
    }

    #[test]
    fn weights_integrate_area() {
        // total weight = area of the far disk minus the excluded disks
        let ms = ms1();
        let plan = SamplingPlan::new(&ms, 400_000, 1e-3, [-6.0, 6.0, -6.0, 6.0]);
        let s = plan.samples(3, 0);
        let total: f64 = s.iter().map(|p| p.w).sum();
        let excluded: f64 = plan.disks.iter().map(|d| std::f64::consts::PI * d.inner * d.inner).sum();
        let want = std::f64::consts::PI * plan.far.outer * plan.far.outer - excluded;
        assert!((total / want - 1.0).abs() < 2e-2, "{total} vs {want}");
    }

    #[test]
    fn integrates_a_smooth_density() {
        // int exp(-|z|^2) dA = pi; the log-polar strata are noisy for this
        let ms = ms1();
        let plan = SamplingPlan::new(&ms, 400_000, 1e-3, [-6.0, 6.0, -6.0, 6.0]);
        let v: f64 = plan.samples(5, 0).iter().map(|p| p.w * (-p.z.norm_sqr()).exp()).sum();
        assert!((v - std::f64::consts::PI).abs() < 3e-2, "{v}");
    }

    #[test]
    fn pole_density_is_exact_on_disks() {
        // |z - p|^-2 over the annulus integrates to 2 pi log(outer / inner)
        let ms = ms1();
        let plan = SamplingPlan::new(&ms, 10_000, 1e-3, [-6.0, 6.0, -6.0, 6.0]);
        let s = plan.samples(1, 0);
        let d = plan.disks[0];
        let v: f64 = s[..d.count].iter().map(|p| p.w / p.local.unwrap().1.norm_sqr()).sum();
        let want = std::f64::consts::TAU * (d.outer / d.inner).ln();
        assert!((v / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_replicates_differ() {
        let ms = ms1();
        let plan = SamplingPlan::new(&ms, 50_000, 1e-3, [-6.0, 6.0, -6.0, 6.0]);
        assert_eq!(plan.samples(9, 0), plan.samples(9, 0));
        assert_ne!(plan.samples(9, 0), plan.samples(9, 1));
    }

    #[test]
    fn excluded_disks_leave_the_box() {
        let ms = ms1();
        let plan = SamplingPlan::new(&ms, 1000, 1e-3, [-20.0, 20.0, -20.0, 20.0]);
        let off = ms.offset();
        for (k, d) in plan.disks.iter().enumerate() {
            let at = |r: f64| {
                let dz = Complex64::new(r, 0.0);
                ms.log_map2(Complex64::new(d.center[0], d.center[1]) + dz, Some((k, dz)), [off[0], off[1]])
            };
            let x = at(d.inner);
            assert!(x[0] < -20.0 || x[1] < -20.0, "{x:?}");
            let x = at(4.0 * d.inner);
            assert!(x[0] > -20.0 && x[1] > -20.0, "{x:?}");
        }
    }
}
