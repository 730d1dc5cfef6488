//! Ronkin-type potential of a marked sphere, its orders, Newton polytope
//! and Monge-Ampère mass.

use super::{hessian_pushforward, HessianMeasure, MarkedSphere};
use crate::error::{Error, Result};
use crate::geometry::{check_recession, convex_hull, fit_affine, ComponentMap, Grid, Polytope, RecessionReport};
use crate::superform::{potential_from_current_with, GridField, PotentialOptions, PotentialReport};
use serde::Serialize;

/// Orders closer than this are treated as equal.
pub const DISTINCT_TOL: f64 = 0.1;
/// Components with fewer deep cells are skipped by the order map.
pub const MIN_DEEP_CELLS: usize = 6;
pub const VERTEX_GAP_TOL: f64 = 0.05;
pub const ESCAPE_TOL: f64 = 0.05;
pub const RECESSION_THRESHOLD_DEG: f64 = 3.0;

/// Potential tolerances for Monte-Carlo currents. The closedness and
/// convexity defects of a sampled current on a grid do not shrink with
/// the sample count (tentacles alias against the grid); these bounds sit
/// about twice above the values measured on the line amoeba at 200 cells
/// per axis (closedness shrinks with the grid spacing).
pub fn monte_carlo_options(eps: f64) -> PotentialOptions {
    PotentialOptions { eps, symmetry_tol: 1e-2, closedness_tol: 5e-2, convexity_tol: 2e-2 }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedRonkin {
    pub measure: HessianMeasure,
    #[serde(skip)]
    pub report: PotentialReport,
}

impl GeneralizedRonkin {
    pub fn potential(&self) -> &GridField {
        &self.report.potential
    }
}

/// Pushes the Hessian measure forward and recovers its convex potential.
pub fn ronkin_generalized(
    ms: &MarkedSphere,
    grid: &Grid,
    samples: usize,
    delta: f64,
    seed: u64,
    opts: &PotentialOptions,
) -> Result<GeneralizedRonkin> {
    let measure = hessian_pushforward(ms, grid, samples, delta, seed)?;
    let report = potential_from_current_with(&measure.current, opts)?;
    Ok(GeneralizedRonkin { measure, report })
}

/// Potential value at the center of cell `(i, j)`.
fn cell_value(r: &GridField, i: usize, j: usize) -> f64 {
    0.25 * (r.at(i, j) + r.at(i + 1, j) + r.at(i, j + 1) + r.at(i + 1, j + 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedOrder {
    pub component: u32,
    pub cells: usize,
    pub deep_cells: usize,
    /// Slope of the affine fit of the potential over the deep cells.
    pub nu: [f64; 2],
    pub fit_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedOrderMap {
    pub orders: Vec<GeneralizedOrder>,
    /// `(component, deep cells)` for components too small to fit.
    pub skipped: Vec<(u32, usize)>,
    pub min_depth_cells: f64,
    /// Fitted orders pairwise farther apart than `DISTINCT_TOL`.
    pub injective: bool,
}

impl GeneralizedOrderMap {
    pub fn pairs(&self) -> Vec<(u32, [f64; 2])> {
        self.orders.iter().map(|o| (o.component, o.nu)).collect()
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.orders.iter().map(|o| o.nu).collect()
    }

    pub fn check(&self) -> Result<()> {
        if let Some(&(id, cells)) = self.skipped.first() {
            return Err(Error::ComponentTooSmall { id, cells });
        }
        for (i, a) in self.orders.iter().enumerate() {
            for b in &self.orders[i + 1..] {
                if dist(a.nu, b.nu) <= DISTINCT_TOL {
                    return Err(Error::NotInjective { a: a.component, b: b.component });
                }
            }
        }
        Ok(())
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Fits an affine function to the potential over the cells of each
/// component at least `eps_cells + 2` cells from the amoeba.
pub fn order_map_generalized(r: &GridField, comps: &ComponentMap, eps_cells: f64) -> GeneralizedOrderMap {
    let d = comps.distance_to_amoeba();
    let depth = eps_cells + 2.0;
    let n2 = comps.grid.shape[1];
    let mut orders = Vec::new();
    let mut skipped = Vec::new();
    for id in 1..=comps.count {
        let cells = comps.cells_of(id);
        let deep: Vec<(usize, usize)> = cells.iter().copied().filter(|&(i, j)| d[i * n2 + j] >= depth).collect();
        if deep.len() < MIN_DEEP_CELLS {
            skipped.push((id, deep.len()));
            continue;
        }
        let xs: Vec<[f64; 2]> = deep.iter().map(|&(i, j)| comps.grid.cell_center(i, j)).collect();
        let vals: Vec<f64> = deep.iter().map(|&(i, j)| cell_value(r, i, j)).collect();
        match fit_affine(&xs, &vals) {
            Ok(fit) => orders.push(GeneralizedOrder {
                component: id,
                cells: cells.len(),
                deep_cells: deep.len(),
                nu: fit.slope,
                fit_residual: fit.max_residual,
            }),
            Err(_) => skipped.push((id, deep.len())),
        }
    }
    let injective =
        orders.iter().enumerate().all(|(i, a)| orders[i + 1..].iter().all(|b| dist(a.nu, b.nu) > DISTINCT_TOL));
    GeneralizedOrderMap { orders, skipped, min_depth_cells: depth, injective }
}

/// Convex hull of the fitted orders.
pub fn newton_polytope_generalized(map: &GeneralizedOrderMap) -> Result<Polytope> {
    convex_hull(&map.points())
}

/// Recession cones of the complement components against the normal cones
/// of the generalized Newton polytope.
pub fn verify_recession_theorem(
    comps: &ComponentMap,
    map: &GeneralizedOrderMap,
    r_probe: f64,
    threshold_deg: f64,
) -> Result<RecessionReport> {
    let p = newton_polytope_generalized(map)?;
    Ok(check_recession(comps, &p, &map.pairs(), r_probe, threshold_deg, DISTINCT_TOL))
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedMaReport {
    /// Area of the convex hull of finite-difference gradients.
    pub mass: f64,
    pub newton_area: f64,
    pub max_escape: f64,
    /// Largest distance from a Newton vertex to the gradient hull.
    pub max_vertex_gap: f64,
    pub samples: usize,
}

impl GeneralizedMaReport {
    pub fn check(&self) -> Result<()> {
        if self.max_escape > ESCAPE_TOL || self.max_vertex_gap > VERTEX_GAP_TOL {
            return Err(Error::GradientEscape(self.max_escape.max(self.max_vertex_gap)));
        }
        Ok(())
    }
}

/// Total Monge-Ampère mass as the area of the gradient image, from
/// central differences at nodes at least `margin` cells inside the box.
pub fn ma_total_mass_generalized(r: &GridField, newton: &Polytope, margin: usize) -> Result<GeneralizedMaReport> {
    let g = &r.grid;
    let (n1, n2) = g.n2();
    let (h1, h2) = (g.h(0), g.h(1));
    let m = margin.max(1);
    if 2 * m >= n1.min(n2) {
        return Err(Error::InvalidArgument(format!("margin {margin} leaves no interior nodes")));
    }
    let mut grads = Vec::new();
    for i in m..=n1 - m {
        for j in m..=n2 - m {
            grads.push([
                (r.at(i + 1, j) - r.at(i - 1, j)) / (2.0 * h1),
                (r.at(i, j + 1) - r.at(i, j - 1)) / (2.0 * h2),
            ]);
        }
    }
    let hull = convex_hull(&grads)?;
    let max_escape = grads.iter().map(|p| newton.distance(p)).fold(0.0, f64::max);
    let max_vertex_gap = (0..newton.vertices.len()).map(|k| hull.distance(&newton.vertex2(k))).fold(0.0, f64::max);
    Ok(GeneralizedMaReport { mass: hull.area(), newton_area: newton.area(), max_escape, max_vertex_gap, samples: grads.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generalized::build_marked_sphere;
    use num_complex::Complex64;

    #[test]
    fn order_map_of_a_known_potential() {
        // max(0, x1, x2) smoothed: the three regions have slopes 0, e1, e2
        let g = Grid::square(-3.0, 3.0, 60).unwrap();
        let r = GridField::from_fn(&g, |x| 0.0f64.max(x[0]).max(x[1]));
        let mask: Vec<bool> = (0..3600)
            .map(|k| {
                let x = g.cell_center(k / 60, k % 60);
                let v = [0.0, x[0], x[1]];
                let mut s = v;
                s.sort_by(f64::total_cmp);
                s[2] - s[1] < 0.15
            })
            .collect();
        let comps = crate::geometry::flood_components(&g, &mask);
        let map = order_map_generalized(&r, &comps, 3.0);
        assert!(map.check().is_ok(), "{map:?}");
        let mut nus: Vec<[i64; 2]> = map.orders.iter().map(|o| [o.nu[0].round() as i64, o.nu[1].round() as i64]).collect();
        nus.sort();
        assert_eq!(nus, vec![[0, 0], [0, 1], [1, 0]]);
        assert!(map.orders.iter().all(|o| o.fit_residual < 1e-9));
        let p = newton_polytope_generalized(&map).unwrap();
        assert!((p.area() - 0.5).abs() < 1e-9);
        let ma = ma_total_mass_generalized(&r, &p, 1).unwrap();
        assert!((ma.mass - 0.5).abs() < 1e-9, "{ma:?}");
        assert!(ma.check().is_ok());
        let rec = verify_recession_theorem(&comps, &map, 2.0, 3.0).unwrap();
        assert!(rec.all_pass, "{rec:?}");
    }

    #[test]
    fn degenerate_sphere_gives_flat_potential() {
        let c = Complex64::new;
        let ms = build_marked_sphere(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![vec![0.0, 0.0], vec![0.0, 0.0]], c(-1.0, 0.0)).unwrap();
        let g = Grid::square(-2.0, 2.0, 20).unwrap();
        let r = ronkin_generalized(&ms, &g, 2000, 1e-3, 1, &monte_carlo_options(3.0)).unwrap();
        assert!(r.potential().values.iter().all(|v| *v == 0.0));
        assert_eq!(r.measure.current.trace_mass(), 0.0);
        let comps = r.measure.components();
        assert_eq!(comps.count, 1);
        let map = order_map_generalized(r.potential(), &comps, 3.0);
        assert_eq!(map.orders.len(), 1);
        assert!(map.orders[0].nu[0].abs() < 1e-12 && map.orders[0].nu[1].abs() < 1e-12);
    }
}
