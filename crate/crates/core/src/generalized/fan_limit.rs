//! Convergence of the rescaled amoebas of `omega / t` to the asymptotic fan.

use super::{amoeba_points, MarkedSphere};
use crate::error::{Error, Result};
use crate::geometry::hausdorff_distance_2d;
use serde::Serialize;

/// Allowed relative increase between consecutive distances.
pub const MONOTONE_SLACK: f64 = 0.1;
/// Required contraction from the first to the last scale.
pub const CONTRACTION: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct FanLimitReport {
    pub ts: Vec<f64>,
    pub distances: Vec<f64>,
    /// `max t d(t)` over the sampled scales.
    pub c: f64,
    pub box_: [f64; 4],
    pub samples: usize,
    pub spacing: f64,
    pub monotone: bool,
    /// `d(t_last) < d(t_first) / CONTRACTION`.
    pub contracts: bool,
    pub pass: bool,
}

/// Hausdorff distance, inside `bx`, between the sampled amoeba of
/// `omega / t` and the support of the asymptotic fan, for each `t`.
pub fn verify_fan_limit(ms: &MarkedSphere, ts: &[f64], bx: [f64; 4], samples: usize, delta: f64, seed: u64) -> Result<FanLimitReport> {
    if ms.dim() != 2 {
        return Err(Error::Unsupported("fan limit is implemented for m = 2".into()));
    }
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("scales must be positive".into()));
    }
    let spacing = ((bx[1] - bx[0]).min(bx[3] - bx[2]) / 1000.0).max(1e-6);
    let fan = ms.asymptotic_fan().support_sample(bx, spacing);
    if fan.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut distances = Vec::with_capacity(ts.len());
    for &t in ts {
        let pts = amoeba_points(&ms.scaled(1.0 / t), bx, samples, delta, seed);
        if pts.is_empty() {
            return Err(Error::EmptyAmoeba);
        }
        distances.push(hausdorff_distance_2d(&pts, &fan)?);
    }
    let c = ts.iter().zip(&distances).map(|(t, d)| t * d).fold(0.0, f64::max);
    let monotone = distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK));
    let contracts = distances[distances.len() - 1] < distances[0] / CONTRACTION;
    Ok(FanLimitReport {
        ts: ts.to_vec(),
        distances,
        c,
        box_: bx,
        samples,
        spacing,
        monotone,
        contracts,
        pass: monotone && contracts,
    })
}
