//! Classical amoebas of Laurent polynomials in two variables: raster,
//! Ronkin function, order map and Monge-Ampere mass.

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, dilate8, flood_components, ComponentMap, Grid, Polytope};
use crate::laurent::LaurentPolynomial;
use crate::superform::GridField;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::OnceLock;

pub const DEFAULT_NQ: usize = 256;
/// Largest trapezoid size tried before giving up on spectral convergence.
pub const MAX_NQ: usize = 1024;
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Smallest admissible `|F / e^M|` at a quadrature node for gradients.
pub const NEAR_ZERO: f64 = 1e-9;
const JENSEN_TOL: f64 = 1e-11;
const JENSEN_PANELS: usize = 16;
const JENSEN_DEPTH: u32 = 30;

/// Cells of the log-plane hit by the amoeba.
#[derive(Debug, Clone, PartialEq)]
pub struct AmoebaRaster {
    pub grid: Grid,
    pub mask: Vec<bool>,
    pub fibers: usize,
    pub angles: usize,
    /// Fibers on which `F` vanished identically, skipped.
    pub degenerate_fibers: usize,
}

impl AmoebaRaster {
    pub fn occupied(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn components(&self) -> ComponentMap {
        flood_components(&self.grid, &self.mask)
    }
}

fn fill_column(grid: &Grid, swapped: bool, col: usize, a: f64, b: f64, out: &mut Vec<usize>) {
    let ax = if swapped { 0 } else { 1 };
    let (lo, hi) = (a.min(b), a.max(b));
    if hi < grid.lo[ax] || lo > grid.hi[ax] {
        return;
    }
    let n = grid.shape[ax];
    let h = grid.h(ax);
    let first = (((lo - grid.lo[ax]) / h).floor().max(0.0) as usize).min(n - 1);
    let last = (((hi - grid.lo[ax]) / h).floor().max(0.0) as usize).min(n - 1);
    for k in first..=last {
        out.push(if swapped { grid.cell_index(k, col) } else { grid.cell_index(col, k) });
    }
}

/// Pairs each root with its nearest successor when the assignment is a
/// bijection and every nearest distance beats the runner-up by 2x.
fn match_roots(a: &[Complex64], b: &[Complex64]) -> Option<Vec<usize>> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len());
    for r in a {
        let mut d: Vec<(f64, usize)> = b.iter().enumerate().map(|(k, s)| ((r - s).norm(), k)).collect();
        d.sort_by(|x, y| x.0.total_cmp(&y.0));
        if d.len() > 1 && d[0].0 >= 0.5 * d[1].0 {
            return None;
        }
        if used[d[0].1] {
            return None;
        }
        used[d[0].1] = true;
        out.push(d[0].1);
    }
    Some(out)
}

/// Slices `f` along fibers of the first variable of `f`; with `swapped`
/// the fibers run along grid axis 1.
fn slice_cells(f: &LaurentPolynomial, grid: &Grid, swapped: bool, fibers: usize, angles: usize) -> (Vec<usize>, usize) {
    let ax = if swapped { 1 } else { 0 };
    let (lo, hi) = (grid.lo[ax], grid.hi[ax]);
    let per: Vec<(Vec<usize>, usize)> = (0..fibers)
        .into_par_iter()
        .map(|k| {
            let t = lo + (k as f64 + 0.5) * (hi - lo) / fibers as f64;
            let col = (((t - lo) / grid.h(ax)).floor() as usize).min(grid.shape[ax] - 1);
            let mut degenerate = 0;
            let roots: Vec<Vec<Complex64>> = (0..angles)
                .map(|a| {
                    let th = TAU * (a as f64 + 0.5) / angles as f64;
                    f.fiber_roots(t, th).unwrap_or_else(|_| {
                        degenerate += 1;
                        vec![]
                    })
                })
                .collect();
            let mut cells = Vec::new();
            for a in 0..angles {
                let next = &roots[(a + 1) % angles];
                match match_roots(&roots[a], next) {
                    Some(m) => {
                        for (r, &k2) in roots[a].iter().zip(&m) {
                            fill_column(grid, swapped, col, r.norm().ln(), next[k2].norm().ln(), &mut cells);
                        }
                    }
                    None => {
                        for r in &roots[a] {
                            let v = r.norm().ln();
                            fill_column(grid, swapped, col, v, v, &mut cells);
                        }
                    }
                }
            }
            (cells, degenerate.min(1))
        })
        .collect();
    let degenerate = per.iter().map(|p| p.1).sum();
    (per.into_iter().flat_map(|p| p.0).collect(), degenerate)
}

/// Marks every cell met by fiber roots, slicing along both variables and
/// filling between matched roots at consecutive angles, then dilates by
/// one cell.
pub fn rasterize_amoeba(f: &LaurentPolynomial, grid: &Grid, fibers: usize, angles: usize) -> Result<AmoebaRaster> {
    if f.dim() != 2 || grid.dim() != 2 {
        return Err(Error::Unsupported("classical raster needs m = 2".into()));
    }
    if fibers == 0 || angles == 0 {
        return Err(Error::InvalidArgument("fibers and angles must be positive".into()));
    }
    let mut mask = vec![false; grid.n_cells()];
    let (a, da) = slice_cells(f, grid, false, fibers, angles);
    let (b, db) = slice_cells(&f.swap_vars(), grid, true, fibers, angles);
    for c in a.into_iter().chain(b) {
        mask[c] = true;
    }
    let mask = dilate8(grid, &mask, 1);
    Ok(AmoebaRaster { grid: grid.clone(), mask, fibers, angles, degenerate_fibers: da + db })
}

/// Terms of `F(e^{x + i theta}) / e^M` split into modulus and phase.
struct Scaled {
    shift: f64,
    terms: Vec<([i32; 2], f64, f64)>,
}

fn scaled(f: &LaurentPolynomial, x: [f64; 2]) -> Scaled {
    let logs: Vec<([i32; 2], f64, f64)> = f
        .terms()
        .map(|(e, c)| ([e[0], e[1]], e[0] as f64 * x[0] + e[1] as f64 * x[1] + c.norm().ln(), c.arg()))
        .collect();
    let shift = logs.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    Scaled { shift, terms: logs.into_iter().map(|(e, l, p)| (e, (l - shift).exp(), p)).collect() }
}

/// Tensor trapezoid on the shifted nodes `2 pi (k + 1/2) / n`. Returns the
/// mean of `log|F|`, the mean of `Re(z_j d_jF / F)` and `min |F / e^M|`.
fn trapezoid(f: &LaurentPolynomial, x: [f64; 2], n: usize, want_grad: bool) -> (f64, [f64; 2], f64) {
    let s = scaled(f, x);
    let nodes: Vec<f64> = (0..n).map(|k| TAU * (k as f64 + 0.5) / n as f64).collect();
    let col: Vec<Vec<Complex64>> =
        s.terms.iter().map(|(e, _, _)| nodes.iter().map(|t| Complex64::from_polar(1.0, e[1] as f64 * t)).collect()).collect();
    let rows: Vec<(f64, [f64; 2], f64)> = nodes
        .par_iter()
        .map(|&t1| {
            let c: Vec<Complex64> =
                s.terms.iter().map(|(e, a, p)| Complex64::from_polar(*a, p + e[0] as f64 * t1)).collect();
            let (mut lv, mut g, mut mn) = (0.0, [0.0; 2], f64::INFINITY);
            for k in 0..n {
                let mut sum = Complex64::new(0.0, 0.0);
                let mut d = [Complex64::new(0.0, 0.0); 2];
                for (t, ct) in c.iter().enumerate() {
                    let v = ct * col[t][k];
                    sum += v;
                    if want_grad {
                        d[0] += v * s.terms[t].0[0] as f64;
                        d[1] += v * s.terms[t].0[1] as f64;
                    }
                }
                let a = sum.norm();
                mn = mn.min(a);
                lv += a.ln();
                if want_grad {
                    g[0] += (d[0] / sum).re;
                    g[1] += (d[1] / sum).re;
                }
            }
            (lv, g, mn)
        })
        .collect();
    let nn = (n * n) as f64;
    let (mut lv, mut g, mut mn) = (0.0, [0.0; 2], f64::INFINITY);
    for (a, b, c) in rows {
        lv += a;
        g[0] += b[0];
        g[1] += b[1];
        mn = mn.min(c);
    }
    (s.shift + lv / nn, [g[0] / nn, g[1] / nn], mn)
}

/// Single tensor-trapezoid evaluation of the Ronkin function with `n`
/// nodes per axis.
pub fn ronkin_trapezoid(f: &LaurentPolynomial, x: [f64; 2], n: usize) -> f64 {
    trapezoid(f, x, n, false).0
}

fn check_dim(f: &LaurentPolynomial) -> Result<()> {
    if f.dim() != 2 {
        return Err(Error::Unsupported("classical Ronkin function needs m = 2".into()));
    }
    Ok(())
}

fn monomial(f: &LaurentPolynomial) -> Option<([f64; 2], f64)> {
    if f.len() != 1 {
        return None;
    }
    let (e, c) = f.terms().next().unwrap();
    Some(([e[0] as f64, e[1] as f64], c.norm().ln()))
}

/// Ronkin function at `x`: trapezoid with `nq` and `2 nq` nodes, accepted
/// when the two agree to [`CONVERGENCE_TOL`]; otherwise (points on or near
/// the amoeba) the exact inner fiber average from the roots of `F`,
/// integrated adaptively over the outer angle.
pub fn ronkin_value(f: &LaurentPolynomial, x: [f64; 2], nq: usize) -> Result<f64> {
    check_dim(f)?;
    if let Some((a, c)) = monomial(f) {
        return Ok(a[0] * x[0] + a[1] * x[1] + c);
    }
    let n = nq.clamp(4, MAX_NQ / 2);
    let a = ronkin_trapezoid(f, x, n);
    let b = ronkin_trapezoid(f, x, 2 * n);
    if a.is_finite() && b.is_finite() && (b - a).abs() < CONVERGENCE_TOL {
        return Ok(b);
    }
    ronkin_jensen(f, x)
}

/// `(1/2pi) int log|F(z1, e^{x2 + i t})| dt` from the fiber factorization:
/// `log|lead| + low x2 + sum max(x2, log|r|)`.
fn fiber_mean(f: &LaurentPolynomial, x: [f64; 2], th1: f64) -> Result<f64> {
    let fac = f.fiber_factorization(x[0], th1)?;
    let mut v = fac.lead.norm().ln() + fac.low as f64 * x[1];
    for r in &fac.roots {
        v += x[1].max(r.norm().ln());
    }
    Ok(v)
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((t, 2.0 / ((1.0 - t * t) * dp * dp)));
    }
    out
}

fn gl_rules() -> &'static (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    static RULES: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(10), gauss_legendre(20)))
}

fn adaptive_gl(g: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (r10, r20) = gl_rules();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s10 = 0.0;
    for (t, w) in r10 {
        s10 += w * g(mid + half * t)?;
    }
    let mut s20 = 0.0;
    for (t, w) in r20 {
        s20 += w * g(mid + half * t)?;
    }
    let (s10, s20) = (s10 * half, s20 * half);
    if (s20 - s10).abs() <= tol || depth == 0 {
        return Ok(s20);
    }
    Ok(adaptive_gl(g, a, mid, 0.5 * tol, depth - 1)? + adaptive_gl(g, mid, b, 0.5 * tol, depth - 1)?)
}

/// Ronkin function by exact inner averaging over the `z2` circle and
/// adaptive Gauss-Legendre over `th1`. Valid on the amoeba as well.
pub fn ronkin_jensen(f: &LaurentPolynomial, x: [f64; 2]) -> Result<f64> {
    check_dim(f)?;
    let g = |t: f64| fiber_mean(f, x, t);
    let w = TAU / JENSEN_PANELS as f64;
    let mut total = 0.0;
    for k in 0..JENSEN_PANELS {
        let a = k as f64 * w;
        total += adaptive_gl(&g, a, a + w, JENSEN_TOL / JENSEN_PANELS as f64, JENSEN_DEPTH)?;
    }
    Ok(total / TAU)
}

/// Gradient of the Ronkin function, the torus average of
/// `Re(z_j dF/dz_j / F)`, with trapezoid doubling as in [`ronkin_value`].
pub fn ronkin_gradient(f: &LaurentPolynomial, x: [f64; 2], nq: usize) -> Result<[f64; 2]> {
    check_dim(f)?;
    if let Some((a, _)) = monomial(f) {
        return Ok(a);
    }
    let mut n = nq.max(4);
    let (_, mut prev, mn) = trapezoid(f, x, n, true);
    if mn < NEAR_ZERO {
        return Err(Error::NearZero(mn));
    }
    let mut change = f64::INFINITY;
    while 2 * n <= MAX_NQ {
        n *= 2;
        let (_, cur, mn) = trapezoid(f, x, n, true);
        if mn < NEAR_ZERO {
            return Err(Error::NearZero(mn));
        }
        change = (cur[0] - prev[0]).abs().max((cur[1] - prev[1]).abs());
        if change < CONVERGENCE_TOL {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NotConverged(change))
}

/// Mean over `n` outer angles of `low + #{roots inside |z2| = e^{x2}}`,
/// the `x2`-derivative of the fiber average.
fn counting_partial(f: &LaurentPolynomial, x: [f64; 2], n: usize) -> Result<f64> {
    let r = x[1].exp();
    let mut total = 0.0;
    for k in 0..n {
        let fac = f.fiber_factorization(x[0], TAU * (k as f64 + 0.5) / n as f64)?;
        total += fac.low as f64 + fac.roots.iter().filter(|z| z.norm() < r).count() as f64;
    }
    Ok(total / n as f64)
}

/// Ronkin gradient by counting fiber roots inside the torus circle in
/// each variable. Exact (integer) off the amoeba; midpoint rule with `n`
/// angles on it.
pub fn ronkin_gradient_counting(f: &LaurentPolynomial, x: [f64; 2], n: usize) -> Result<[f64; 2]> {
    check_dim(f)?;
    if let Some((a, _)) = monomial(f) {
        return Ok(a);
    }
    let g1 = counting_partial(&f.swap_vars(), [x[1], x[0]], n)?;
    let g2 = counting_partial(f, x, n)?;
    Ok([g1, g2])
}

/// Ronkin values at the nodes of `grid`.
pub fn ronkin_field(f: &LaurentPolynomial, grid: &Grid, nq: usize) -> Result<GridField> {
    let (n1, n2) = grid.n2();
    let vals: Vec<f64> = (0..(n1 + 1) * (n2 + 1))
        .into_par_iter()
        .map(|k| ronkin_value(f, grid.node(k / (n2 + 1), k % (n2 + 1)), nq))
        .collect::<Result<_>>()?;
    GridField::new(grid.clone(), vals)
}

/// Order of one complement component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentOrder {
    pub component: u32,
    pub cells: usize,
    /// Probe point (deepest cell center, possibly jittered).
    pub point: [f64; 2],
    /// Distance from the probe cell to the amoeba, in cells.
    pub depth: f64,
    pub nu: [f64; 2],
    pub rounded: [i64; 2],
    pub rounding_distance: f64,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderMapResult {
    pub orders: Vec<ComponentOrder>,
    pub polytope: Polytope,
    /// Rounded orders pairwise distinct.
    pub injective: bool,
    /// Rounded orders inside the support polytope.
    pub inside_polytope: bool,
}

/// Distance above which a rounded order is flagged under-resolved.
pub const UNDER_RESOLVED: f64 = 0.1;

impl OrderMapResult {
    pub fn pairs(&self) -> Vec<(u32, [f64; 2])> {
        self.orders.iter().map(|o| (o.component, o.nu)).collect()
    }

    pub fn max_rounding_distance(&self) -> f64 {
        self.orders.iter().map(|o| o.rounding_distance).fold(0.0, f64::max)
    }

    /// First violated property, as an error.
    pub fn check(&self) -> Result<()> {
        if let Some(o) = self.orders.iter().find(|o| o.under_resolved) {
            return Err(Error::UnderResolved { id: o.component, distance: o.rounding_distance });
        }
        for (i, a) in self.orders.iter().enumerate() {
            for b in &self.orders[i + 1..] {
                if a.rounded == b.rounded {
                    return Err(Error::NotInjective { a: a.component, b: b.component });
                }
            }
        }
        for o in &self.orders {
            let r = [o.rounded[0] as f64, o.rounded[1] as f64];
            if !self.polytope.contains(&r, 1e-9) {
                return Err(Error::OutsidePolytope { order: r.to_vec() });
            }
        }
        Ok(())
    }
}

/// Gradient at `x`, retrying at a few nearby points when a quadrature
/// node lands on the zero set.
fn gradient_with_jitter(f: &LaurentPolynomial, x: [f64; 2], h: f64, nq: usize) -> Result<([f64; 2], [f64; 2])> {
    const OFFSETS: [[f64; 2]; 5] = [[0.0, 0.0], [0.11, 0.07], [-0.09, 0.13], [0.05, -0.12], [-0.13, -0.06]];
    let mut last = Error::NearZero(0.0);
    for o in OFFSETS {
        let p = [x[0] + o[0] * h, x[1] + o[1] * h];
        match ronkin_gradient(f, p, nq) {
            Ok(g) => return Ok((p, g)),
            Err(e @ Error::NearZero(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Evaluates the Ronkin gradient at each component's deepest cell.
pub fn order_map_classical(f: &LaurentPolynomial, comps: &ComponentMap, nq: usize) -> Result<OrderMapResult> {
    check_dim(f)?;
    let polytope = f.support_polytope()?;
    let dist = comps.distance_to_amoeba();
    let h = comps.grid.h(0).min(comps.grid.h(1));
    let mut orders = Vec::new();
    for id in 1..=comps.count {
        let Some(((i, j), depth)) = comps.deepest_cell(id, &dist) else { continue };
        let (point, nu) = gradient_with_jitter(f, comps.grid.cell_center(i, j), h, nq)?;
        let rounded = [nu[0].round() as i64, nu[1].round() as i64];
        let rounding_distance = (nu[0] - rounded[0] as f64).hypot(nu[1] - rounded[1] as f64);
        orders.push(ComponentOrder {
            component: id,
            cells: comps.size(id),
            point,
            depth,
            nu,
            rounded,
            rounding_distance,
            under_resolved: rounding_distance > UNDER_RESOLVED,
        });
    }
    let injective = orders.iter().enumerate().all(|(i, a)| orders[i + 1..].iter().all(|b| a.rounded != b.rounded));
    let inside_polytope =
        orders.iter().all(|o| polytope.contains(&[o.rounded[0] as f64, o.rounded[1] as f64], 1e-9));
    Ok(OrderMapResult { orders, polytope, injective, inside_polytope })
}

#[derive(Debug, Clone, Serialize)]
pub struct MaMassReport {
    /// Area of the convex hull of the sampled gradients.
    pub mass: f64,
    pub newton_area: f64,
    pub gradient_hull: Polytope,
    /// Largest distance of a gradient sample from the Newton polytope.
    pub max_escape: f64,
    pub samples: usize,
    /// Samples on degenerate fibers, where the trapezoid gradient was used.
    pub fallback_samples: usize,
}

/// Gradient samples escaping the Newton polytope by more than this flag
/// a quadrature failure.
pub const ESCAPE_TOL: f64 = 0.05;

impl MaMassReport {
    pub fn check(&self) -> Result<()> {
        if self.max_escape > ESCAPE_TOL {
            return Err(Error::GradientEscape(self.max_escape));
        }
        Ok(())
    }
}

/// Angles per variable for the counting gradient in the mass estimate.
pub const COUNTING_ANGLES: usize = 512;

/// Monge-Ampere mass of the Ronkin function as the area of the convex
/// hull of its gradients at the cell centers of `grid`. Gradients come
/// from [`ronkin_gradient_counting`], which is exact off the amoeba; the
/// trapezoid gradient is used where the root count fails.
pub fn ma_total_mass_classical(f: &LaurentPolynomial, grid: &Grid, nq: usize) -> Result<MaMassReport> {
    check_dim(f)?;
    let newton = f.support_polytope()?;
    let (n1, n2) = grid.n2();
    let grads: Vec<([f64; 2], bool)> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let x = grid.cell_center(k / n2, k % n2);
            match ronkin_gradient_counting(f, x, COUNTING_ANGLES) {
                Ok(g) => Ok((g, false)),
                Err(Error::DegenerateFiber) => Ok((gradient_with_jitter(f, x, grid.h(0), nq)?.1, true)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let pts: Vec<[f64; 2]> = grads.iter().map(|g| g.0).collect();
    let hull = convex_hull(&pts)?;
    let max_escape = pts.iter().map(|p| newton.distance(p)).fold(0.0, f64::max);
    Ok(MaMassReport {
        mass: hull.area(),
        newton_area: newton.area(),
        gradient_hull: hull,
        max_escape,
        samples: pts.len(),
        fallback_samples: grads.iter().filter(|g| g.1).count(),
    })
}
