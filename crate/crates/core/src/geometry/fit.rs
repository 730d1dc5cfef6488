use serde::Serialize;
use crate::error::{Error, Result};

/// Least-squares affine fit `v ~ s . x + c` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineFit {
    pub slope: [f64; 2],
    pub intercept: f64,
    /// Largest absolute residual over the fitted points.
    pub max_residual: f64,
}

impl AffineFit {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.slope[0] * x[0] + self.slope[1] * x[1] + self.intercept
    }
}

/// Fits through the points after centering them, solving the 3x3 normal
/// equations by Cramer's rule.
pub fn fit_affine(xs: &[[f64; 2]], vals: &[f64]) -> Result<AffineFit> {
    if xs.len() != vals.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: vals.len() });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("affine fit needs at least 3 points".into()));
    }
    let n = xs.len() as f64;
    let mx = [xs.iter().map(|p| p[0]).sum::<f64>() / n, xs.iter().map(|p| p[1]).sum::<f64>() / n];
    let mv = vals.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy, mut sxv, mut syv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, v) in xs.iter().zip(vals) {
        let (a, b, w) = (p[0] - mx[0], p[1] - mx[1], v - mv);
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
        sxv += a * w;
        syv += b * w;
    }
    let det = sxx * syy - sxy * sxy;
    if det.abs() <= 1e-14 * (sxx * syy).max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument("affine fit points are collinear".into()));
    }
    let slope = [(sxv * syy - syv * sxy) / det, (syv * sxx - sxv * sxy) / det];
    let intercept = mv - slope[0] * mx[0] - slope[1] * mx[1];
    let mut fit = AffineFit { slope, intercept, max_residual: 0.0 };
    fit.max_residual = xs.iter().zip(vals).map(|(p, v)| (fit.eval(*p) - v).abs()).fold(0.0, f64::max);
    Ok(fit)
}
