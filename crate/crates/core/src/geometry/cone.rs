use super::hull::Polytope;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const ANG_TOL: f64 = 1e-9;

/// Cone spanned by unit rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
}

/// Planar cone as an arc of directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConeShape {
    Zero,
    Full,
    /// The line through the origin at angle `angle` (radians) and its opposite.
    Line { angle: f64 },
    /// Directions from `start` counterclockwise through `width` radians.
    Arc { start: f64, width: f64 },
}

/// Collection of cones; not necessarily a fan in the toric sense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fan {
    pub cones: Vec<Cone>,
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

fn ang_diff(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

impl Cone {
    pub fn zero(dim: usize) -> Cone {
        Cone { dim, generators: vec![] }
    }

    /// Whole plane, as the four axis directions.
    pub fn full_plane() -> Cone {
        Cone::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]])
    }

    /// Normalizes and deduplicates; zero vectors are dropped.
    pub fn new(dim: usize, rays: Vec<Vec<f64>>) -> Cone {
        let mut generators: Vec<Vec<f64>> = Vec::new();
        for r in rays {
            assert_eq!(r.len(), dim);
            let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 || !n.is_finite() {
                continue;
            }
            let u: Vec<f64> = r.iter().map(|v| v / n).collect();
            let dup = generators
                .iter()
                .any(|g| g.iter().zip(&u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= ANG_TOL);
            if !dup {
                generators.push(u);
            }
        }
        Cone { dim, generators }
    }

    /// Planar cone from a set of angles (radians).
    pub fn from_angles(angles: &[f64]) -> Cone {
        Cone::new(2, angles.iter().map(|a| vec![a.cos(), a.sin()]).collect())
    }

    pub fn angles(&self) -> Vec<f64> {
        self.generators.iter().map(|g| wrap(g[1].atan2(g[0]))).collect()
    }

    /// Classifies a planar cone by the largest angular gap between
    /// consecutive generators.
    pub fn shape(&self) -> ConeShape {
        assert_eq!(self.dim, 2, "shape is defined for planar cones");
        let mut a = self.angles();
        if a.is_empty() {
            return ConeShape::Zero;
        }
        a.sort_by(f64::total_cmp);
        if a.len() == 1 {
            return ConeShape::Arc { start: a[0], width: 0.0 };
        }
        let n = a.len();
        let (mut gap, mut after) = (0.0, 0);
        for i in 0..n {
            let g = if i + 1 < n { a[i + 1] - a[i] } else { a[0] + TAU - a[n - 1] };
            if g > gap {
                gap = g;
                after = (i + 1) % n;
            }
        }
        let tol = 1e-7;
        if gap < PI - tol {
            ConeShape::Full
        } else if gap <= PI + tol {
            // two antipodal generators span a line unless some third
            // generator lies strictly on one side
            if n == 2 {
                ConeShape::Line { angle: a[0] }
            } else {
                ConeShape::Arc { start: a[after], width: TAU - gap }
            }
        } else {
            ConeShape::Arc { start: a[after], width: TAU - gap }
        }
    }

    /// Does the planar cone contain the direction at angle `theta`?
    pub fn contains_angle(&self, theta: f64, tol: f64) -> bool {
        match self.shape() {
            ConeShape::Zero => false,
            ConeShape::Full => true,
            ConeShape::Line { angle } => ang_diff(theta, angle) <= tol || ang_diff(theta, angle + PI) <= tol,
            ConeShape::Arc { start, width } => {
                let rel = wrap(theta - start);
                rel <= width + tol || rel >= TAU - tol
            }
        }
    }
}

/// Largest angular discrepancy, in degrees, between two planar cones.
///
/// Arcs are compared boundary ray by boundary ray. Cones of different
/// shape kinds differ by 180 degrees.
pub fn angular_mismatch_deg(a: &Cone, b: &Cone) -> f64 {
    let d = match (a.shape(), b.shape()) {
        (ConeShape::Zero, ConeShape::Zero) | (ConeShape::Full, ConeShape::Full) => 0.0,
        (ConeShape::Line { angle: x }, ConeShape::Line { angle: y }) => ang_diff(x, y).min(ang_diff(x, y + PI)),
        (ConeShape::Arc { start: s1, width: w1 }, ConeShape::Arc { start: s2, width: w2 }) => {
            ang_diff(s1, s2).max(ang_diff(s1 + w1, s2 + w2))
        }
        _ => PI,
    };
    d.to_degrees()
}

/// Outer normal cone of a planar polytope at vertex `v`.
pub fn normal_cone(p: &Polytope, v: &[f64]) -> Result<Cone> {
    let i = p.vertex_index(v, 1e-9).ok_or(Error::NotAVertex)?;
    if p.dim == 1 {
        let lo = p.vertices[0][0];
        return Ok(if p.vertices.len() == 1 {
            Cone::new(1, vec![vec![1.0], vec![-1.0]])
        } else if p.vertices[i][0] == lo {
            Cone::new(1, vec![vec![-1.0]])
        } else {
            Cone::new(1, vec![vec![1.0]])
        });
    }
    let n = p.vertices.len();
    if n == 1 {
        return Ok(Cone::full_plane());
    }
    if p.degenerate {
        // closed half-plane facing away from the other endpoint
        let o = p.vertex2(1 - i);
        let w = p.vertex2(i);
        let d = [w[0] - o[0], w[1] - o[1]];
        return Ok(Cone::new(2, vec![vec![-d[1], d[0]], vec![d[0], d[1]], vec![d[1], -d[0]]]));
    }
    let prev = &p.facets[(i + n - 1) % n];
    let next = &p.facets[i];
    Ok(Cone::new(2, vec![prev.normal.clone(), next.normal.clone()]))
}
