use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Half-space `normal · x <= offset` with a unit outer normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Convex polytope in dimension 1 or 2.
///
/// In the plane, vertices run counterclockwise and facet `i` is the edge
/// from vertex `i` to vertex `i + 1`. Points and segments carry
/// `degenerate = true` and no facets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    pub degenerate: bool,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    norm2([p[0] - a[0] - t * d[0], p[1] - a[1] - t * d[1]])
}

/// Planar convex hull by Andrew's monotone chain.
///
/// Collinear boundary points are dropped, so only extreme points remain.
pub fn convex_hull(points: &[[f64; 2]]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);

    let scale = pts.iter().fold(1.0f64, |s, p| s.max(p[0].abs()).max(p[1].abs()));
    let eps = 1e-12 * scale * scale;

    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() + 1);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        // all points collinear: keep the two extremes
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        let vertices = if norm2([b[0] - a[0], b[1] - a[1]]) <= 1e-12 {
            vec![a.to_vec()]
        } else {
            vec![a.to_vec(), b.to_vec()]
        };
        return Ok(Polytope { dim: 2, vertices, facets: vec![], degenerate: true });
    }

    let n = hull.len();
    let facets = (0..n)
        .map(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            let normal = vec![dy / len, -dx / len];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            Facet { normal, offset }
        })
        .collect();
    Ok(Polytope { dim: 2, vertices: hull.iter().map(|v| v.to_vec()).collect(), facets, degenerate: false })
}

/// Interval hull of real numbers, as a one-dimensional polytope.
pub fn interval_hull(values: &[f64]) -> Result<Polytope> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 {
        return Ok(Polytope { dim: 1, vertices: vec![vec![lo]], facets: vec![], degenerate: true });
    }
    Ok(Polytope {
        dim: 1,
        vertices: vec![vec![lo], vec![hi]],
        facets: vec![Facet { normal: vec![-1.0], offset: -lo }, Facet { normal: vec![1.0], offset: hi }],
        degenerate: false,
    })
}

impl Polytope {
    pub fn vertex2(&self, i: usize) -> [f64; 2] {
        [self.vertices[i][0], self.vertices[i][1]]
    }

    /// Planar area (shoelace). Zero for degenerate or one-dimensional hulls.
    pub fn area(&self) -> f64 {
        if self.dim != 2 || self.degenerate {
            return 0.0;
        }
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.vertex2(i);
                let b = self.vertex2((i + 1) % n);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    /// Euclidean distance from `p` to the polytope (zero inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        if self.dim == 1 {
            let lo = self.vertices[0][0];
            let hi = self.vertices.last().unwrap()[0];
            return (lo - p[0]).max(p[0] - hi).max(0.0);
        }
        let q = [p[0], p[1]];
        let n = self.vertices.len();
        if n == 1 {
            let v = self.vertex2(0);
            return norm2([q[0] - v[0], q[1] - v[1]]);
        }
        if !self.degenerate && self.facets.iter().all(|f| f.normal[0] * q[0] + f.normal[1] * q[1] <= f.offset) {
            return 0.0;
        }
        let edges = if self.degenerate { 1 } else { n };
        (0..edges)
            .map(|i| seg_dist(q, self.vertex2(i), self.vertex2((i + 1) % n)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Index of the vertex within `tol` of `p`, if any.
    pub fn vertex_index(&self, p: &[f64], tol: f64) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= tol)
    }

    pub fn translate(&self, shift: &[f64]) -> Polytope {
        let vertices = self.vertices.iter().map(|v| v.iter().zip(shift).map(|(a, b)| a + b).collect()).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: f.offset + f.normal.iter().zip(shift).map(|(a, b)| a * b).sum::<f64>(),
            })
            .collect();
        Polytope { dim: self.dim, vertices, facets, degenerate: self.degenerate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interior_point_removed() {
        let p = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]]).unwrap();
        assert_eq!(p.vertices, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(p.facets.len(), 3);
        assert!((p.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_point_is_degenerate() {
        let p = convex_hull(&[[0.0, 0.0]]).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.vertices.len(), 1);
        assert!(p.facets.is_empty());
    }

    #[test]
    fn collinear_input_is_a_segment() {
        let p = convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.5, 0.5]]).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.vertices, vec![vec![0.0, 0.0], vec![2.0, 2.0]]);
        assert!((p.distance(&[0.0, 2.0]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn every_vertex_lies_on_two_facets() {
        let p = convex_hull(&[[0.0, 0.0], [2.0, 0.0], [3.0, 1.0], [1.0, 3.0], [-1.0, 1.0]]).unwrap();
        for v in &p.vertices {
            let on = p.facets.iter().filter(|f| (f.normal[0] * v[0] + f.normal[1] * v[1] - f.offset).abs() < 1e-12).count();
            assert_eq!(on, 2);
        }
    }

    #[test]
    fn random_disk_points_inside_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..100)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                let t = rng.gen::<f64>() * std::f64::consts::TAU;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let p = convex_hull(&pts).unwrap();
        assert!(p.area() <= std::f64::consts::PI);
        for q in &pts {
            assert!(p.contains(q, 1e-12));
        }
        // containment oracle: each hull vertex is an input point and no
        // input point is strictly outside any facet
        for v in &p.vertices {
            assert!(pts.iter().any(|q| q[0] == v[0] && q[1] == v[1]));
        }
    }
}
