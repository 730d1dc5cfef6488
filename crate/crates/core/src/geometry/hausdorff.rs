use crate::error::{Error, Result};
use rayon::prelude::*;

fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn directed_brute<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    a.par_iter()
        .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between finite samples, by brute force.
pub fn hausdorff_distance<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(directed_brute(a, b).max(directed_brute(b, a)))
}

/// Bucket grid over a planar point set for exact nearest-distance queries.
struct Buckets<'a> {
    pts: &'a [[f64; 2]],
    lo: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> Buckets<'a> {
    fn new(pts: &'a [[f64; 2]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9 * (1.0 + lo[0].abs().max(lo[1].abs())));
        let per_side = ((pts.len() as f64).sqrt().ceil() as usize).max(1);
        let cell = ext / per_side as f64;
        let dims = [
            ((hi[0] - lo[0]) / cell).floor() as usize + 1,
            ((hi[1] - lo[1]) / cell).floor() as usize + 1,
        ];
        let key = |p: &[f64; 2]| {
            let i = (((p[0] - lo[0]) / cell).floor() as usize).min(dims[0] - 1);
            let j = (((p[1] - lo[1]) / cell).floor() as usize).min(dims[1] - 1);
            i * dims[1] + j
        };
        let nb = dims[0] * dims[1];
        let mut counts = vec![0usize; nb + 1];
        for p in pts {
            counts[key(p) + 1] += 1;
        }
        for k in 0..nb {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut order = vec![0; pts.len()];
        for (idx, p) in pts.iter().enumerate() {
            let k = key(p);
            order[fill[k]] = idx;
            fill[k] += 1;
        }
        Buckets { pts, lo, cell, dims, start: counts, order }
    }

    fn nearest(&self, q: &[f64; 2]) -> f64 {
        let lim = 1e15;
        let ci = ((q[0] - self.lo[0]) / self.cell).floor().clamp(-lim, lim) as i64;
        let cj = ((q[1] - self.lo[1]) / self.cell).floor().clamp(-lim, lim) as i64;
        let (d0, d1) = (self.dims[0] as i64, self.dims[1] as i64);
        // Chebyshev ring index of the nearest bucket
        let r0 = [ci - (d0 - 1), -ci, cj - (d1 - 1), -cj, 0].into_iter().max().unwrap();
        let mut best = f64::INFINITY;
        for r in r0..=r0 + d0.max(d1) {
            // every point in ring r is at least (r-1)*cell away
            if best.is_finite() && (r as f64 - 1.0) * self.cell > best {
                break;
            }
            for i in (ci - r).max(0)..=(ci + r).min(d0 - 1) {
                let on_edge = i == ci - r || i == ci + r;
                let js: Vec<i64> = if on_edge {
                    ((cj - r).max(0)..=(cj + r).min(d1 - 1)).collect()
                } else {
                    vec![cj - r, cj + r]
                };
                for j in js {
                    if j < 0 || j >= d1 {
                        continue;
                    }
                    let k = (i * d1 + j) as usize;
                    for &idx in &self.order[self.start[k]..self.start[k + 1]] {
                        best = best.min(dist(q, &self.pts[idx]));
                    }
                }
            }
        }
        best
    }
}

/// Planar Hausdorff distance using bucket grids; returns exactly the
/// brute-force value.
pub fn hausdorff_distance_2d(a: &[[f64; 2]], b: &[[f64; 2]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let ba = Buckets::new(a);
    let bb = Buckets::new(b);
    let ab = a.par_iter().map(|p| bb.nearest(p)).reduce(|| 0.0, f64::max);
    let bab = b.par_iter().map(|p| ba.nearest(p)).reduce(|| 0.0, f64::max);
    Ok(ab.max(bab))
}
