//! Monte-Carlo pushforward of the Hessian measure along the Log map.

use super::{MarkedSphere, Sample, SamplingPlan};
use crate::error::{Error, Result};
use crate::geometry::{dilate8, ComponentMap, Grid};
use crate::superform::SuperCurrent11;
use serde::Serialize;
use std::f64::consts::PI;

/// Second replicate stream family.
const REPLICATE_B: u64 = 1;

/// Real density matrix of the (1,1)-current at `z`, per unit area.
pub fn hessian_density(ms: &MarkedSphere, z: num_complex::Complex64) -> [[f64; 2]; 2] {
    density(ms.g(z))
}

fn density(g: Vec<num_complex::Complex64>) -> [[f64; 2]; 2] {
    let (g1, g2) = (g[0], g[1]);
    let c = 1.0 / (2.0 * PI);
    let off = -(g1 * g2.conj()).re * c;
    [[g2.norm_sqr() * c, off], [off, g1.norm_sqr() * c]]
}

#[derive(Debug, Clone, Serialize)]
pub struct HessianMeasure {
    #[serde(skip)]
    pub current: SuperCurrent11,
    /// Cells hit by a sample image of positive density, dilated by one cell.
    #[serde(skip)]
    pub amoeba_mask: Vec<bool>,
    pub samples: usize,
    pub seed: u64,
    pub delta: f64,
    /// Excluded radius actually used around each marked point.
    pub deltas_used: Vec<f64>,
    pub far_radius: f64,
    /// Trace mass of samples whose image leaves the box.
    pub tail_mass: f64,
    pub deposited_mass: f64,
    /// Relative trace-mass difference of the two half-sample replicates.
    pub mc_rel_error: f64,
    /// Cellwise relative L1 difference of the two replicates.
    pub mc_cell_rel_error: f64,
}

impl HessianMeasure {
    pub fn components(&self) -> ComponentMap {
        crate::geometry::flood_components(&self.current.grid, &self.amoeba_mask)
    }
}

struct Deposit {
    masses: Vec<Vec<f64>>,
    hits: Vec<bool>,
    tail: f64,
}

fn deposit(ms: &MarkedSphere, grid: &Grid, samples: &[Sample], offset: [f64; 2]) -> Deposit {
    let n = grid.n_cells();
    let mut masses = vec![vec![0.0; n]; 4];
    let mut hits = vec![false; n];
    let mut tail = 0.0;
    for s in samples {
        let h = density(ms.g_local(s.z, s.local));
        if !(h[0][0].is_finite() && h[1][1].is_finite()) {
            continue;
        }
        let x = ms.log_map2(s.z, s.local, offset);
        match grid.cell_of(x) {
            Some((i, j)) => {
                let c = grid.cell_index(i, j);
                // zero density means no curve there (all-zero residues)
                hits[c] |= h[0][0] + h[1][1] > 0.0;
                masses[0][c] += s.w * h[0][0];
                masses[1][c] += s.w * h[0][1];
                masses[2][c] += s.w * h[1][0];
                masses[3][c] += s.w * h[1][1];
            }
            None => tail += s.w * (h[0][0] + h[1][1]),
        }
    }
    Deposit { masses, hits, tail }
}

/// Pushes the Hessian measure of `ms` forward onto `grid` using `samples`
/// points split over two independent replicates.
pub fn hessian_pushforward(ms: &MarkedSphere, grid: &Grid, samples: usize, delta: f64, seed: u64) -> Result<HessianMeasure> {
    if ms.dim() != 2 || grid.dim() != 2 {
        return Err(Error::Unsupported(format!("pushforward needs m = 2, got {}", ms.dim())));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let bx = grid.flat_box();
    let plan = SamplingPlan::new(ms, samples / 2, delta, [bx[0], bx[1], bx[2], bx[3]]);
    let off = ms.offset();
    let offset = [off[0], off[1]];
    let (a, b) = rayon::join(
        || deposit(ms, grid, &plan.samples(seed, 0), offset),
        || deposit(ms, grid, &plan.samples(seed, REPLICATE_B), offset),
    );
    let masses: Vec<Vec<f64>> =
        (0..4).map(|e| a.masses[e].iter().zip(&b.masses[e]).map(|(x, y)| 0.5 * (x + y)).collect()).collect();
    let trace = |m: &Vec<Vec<f64>>| m[0].iter().chain(&m[3]).sum::<f64>();
    let (ta, tb) = (trace(&a.masses), trace(&b.masses));
    let mc_rel_error = if ta + tb > 0.0 { (ta - tb).abs() / (ta + tb) } else { 0.0 };
    let (mut diff, mut sum) = (0.0, 0.0);
    for e in 0..4 {
        for (x, y) in a.masses[e].iter().zip(&b.masses[e]) {
            diff += (x - y).abs();
            sum += (x + y).abs();
        }
    }
    let hits: Vec<bool> = a.hits.iter().zip(&b.hits).map(|(x, y)| *x || *y).collect();
    let current = SuperCurrent11::new(grid.clone(), masses)?;
    let deposited_mass = current.trace_mass();
    Ok(HessianMeasure {
        current,
        amoeba_mask: dilate8(grid, &hits, 1),
        samples: 2 * plan.total(),
        seed,
        delta,
        deltas_used: plan.disks.iter().map(|d| d.inner).collect(),
        far_radius: plan.far.outer,
        tail_mass: 0.5 * (a.tail + b.tail),
        deposited_mass,
        mc_rel_error,
        mc_cell_rel_error: if sum > 0.0 { diff / sum } else { 0.0 },
    })
}

/// Sampled points of the generalized amoeba inside `bx`, without weights.
pub fn amoeba_points(ms: &MarkedSphere, bx: [f64; 4], samples: usize, delta: f64, seed: u64) -> Vec<[f64; 2]> {
    let plan = SamplingPlan::new(ms, samples, delta, bx);
    let off = ms.offset();
    let offset = [off[0], off.get(1).copied().unwrap_or(0.0)];
    plan.samples(seed, 0)
        .iter()
        .map(|s| ms.log_map2(s.z, s.local, offset))
        .filter(|x| x[0] >= bx[0] && x[0] <= bx[1] && x[1] >= bx[2] && x[1] <= bx[3])
        .collect()
}
