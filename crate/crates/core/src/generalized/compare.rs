//! Side-by-side comparison of a generalized amoeba pipeline with the
//! classical pipeline of a Laurent polynomial parameterized by the same
//! curve.

use super::GeneralizedOrderMap;
use crate::classical::{order_map_classical, rasterize_amoeba, ronkin_value};
use crate::error::{Error, Result};
use crate::geometry::{fit_affine, hausdorff_distance_2d, AffineFit, ComponentMap, Grid};
use crate::laurent::LaurentPolynomial;
use crate::superform::GridField;
use serde::Serialize;

/// Probe grid side.
pub const PROBES: usize = 5;
pub const RONKIN_TOL: f64 = 5e-2;
/// Largest admissible order error after gauge calibration.
pub const ORDER_TOL: f64 = 5e-2;

#[derive(Debug, Clone, Serialize)]
pub struct OrderMatch {
    pub component: u32,
    pub classical_component: u32,
    pub generalized: [f64; 2],
    pub calibrated: [f64; 2],
    pub classical: [i64; 2],
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalComparison {
    pub polynomial: String,
    /// Classical coordinates are generalized coordinates plus `shift`.
    pub shift: [f64; 2],
    pub probes: Vec<[f64; 2]>,
    /// Affine part of `R_gen - R_classical` over the probes.
    pub affine: AffineFit,
    /// Max deviation of `R_gen - R_classical` from its affine fit.
    pub max_deviation: f64,
    pub ronkin_pass: bool,
    /// Hausdorff distance between the two rasters' cell centers.
    pub amoeba_hausdorff: f64,
    pub classical_components: u32,
    /// Added to generalized orders to land on classical ones.
    pub gauge: [f64; 2],
    pub reference_component: Option<u32>,
    pub orders: Vec<OrderMatch>,
    pub max_order_error: f64,
    pub orders_match: bool,
}

/// Compares the generalized potential `r`, its components and orders with
/// the classical pipeline of `f` on the grid translated by `shift`.
#[allow(clippy::too_many_arguments)]
pub fn compare_with_classical(
    r: &GridField,
    comps: &ComponentMap,
    orders: &GeneralizedOrderMap,
    f: &LaurentPolynomial,
    shift: [f64; 2],
    nq: usize,
    fibers: usize,
    angles: usize,
) -> Result<ClassicalComparison> {
    let g = &r.grid;
    if g.dim() != 2 || f.dim() != 2 {
        return Err(Error::Unsupported("comparison needs two variables".into()));
    }
    let bx = g.flat_box();
    let mut probes = Vec::with_capacity(PROBES * PROBES);
    for a in 1..=PROBES {
        for b in 1..=PROBES {
            let s = a as f64 / (PROBES + 1) as f64;
            let t = b as f64 / (PROBES + 1) as f64;
            probes.push([bx[0] + s * (bx[1] - bx[0]), bx[2] + t * (bx[3] - bx[2])]);
        }
    }
    let diffs: Vec<f64> = probes
        .iter()
        .map(|x| Ok(r.interpolate(*x) - ronkin_value(f, [x[0] + shift[0], x[1] + shift[1]], nq)?))
        .collect::<Result<_>>()?;
    let affine = fit_affine(&probes, &diffs)?;
    let max_deviation = affine.max_residual;

    let cg = Grid::from_box(&[bx[0] + shift[0], bx[1] + shift[0], bx[2] + shift[1], bx[3] + shift[1]], g.shape.clone())?;
    let raster = rasterize_amoeba(f, &cg, fibers, angles)?;
    let ccomps = raster.components();
    let (n1, n2) = g.n2();
    let centers = |mask: &[bool]| -> Vec<[f64; 2]> {
        (0..n1 * n2).filter(|&k| mask[k]).map(|k| g.cell_center(k / n2, k % n2)).collect()
    };
    let (a, b) = (centers(&raster.mask), centers(&comps.occupied_mask()));
    let amoeba_hausdorff = if a.is_empty() && b.is_empty() {
        0.0
    } else if a.is_empty() || b.is_empty() {
        f64::INFINITY
    } else {
        hausdorff_distance_2d(&a, &b)?
    };

    let corders = order_map_classical(f, &ccomps, nq)?;
    let dist = comps.distance_to_amoeba();
    let mut pairs = Vec::new();
    for o in &orders.orders {
        let Some(((i, j), _)) = comps.deepest_cell(o.component, &dist) else { continue };
        let cid = ccomps.label_at(i, j);
        if let Some(co) = corders.orders.iter().find(|c| c.component == cid) {
            pairs.push((o.component, cid, o.nu, co.rounded));
        }
    }
    let gauge = pairs
        .first()
        .map(|p| [p.3[0] as f64 - p.2[0], p.3[1] as f64 - p.2[1]])
        .unwrap_or([0.0, 0.0]);
    let matches: Vec<OrderMatch> = pairs
        .iter()
        .map(|&(id, cid, nu, cl)| {
            let cal = [nu[0] + gauge[0], nu[1] + gauge[1]];
            OrderMatch {
                component: id,
                classical_component: cid,
                generalized: nu,
                calibrated: cal,
                classical: cl,
                error: (cal[0] - cl[0] as f64).hypot(cal[1] - cl[1] as f64),
            }
        })
        .collect();
    let max_order_error = matches.iter().map(|m| m.error).fold(0.0, f64::max);
    let orders_match = !matches.is_empty()
        && matches.len() == orders.orders.len()
        && matches.len() == ccomps.count as usize
        && max_order_error <= ORDER_TOL;
    Ok(ClassicalComparison {
        polynomial: f.to_string(),
        shift,
        probes,
        affine,
        max_deviation,
        ronkin_pass: max_deviation <= RONKIN_TOL,
        amoeba_hausdorff,
        classical_components: ccomps.count,
        gauge,
        reference_component: pairs.first().map(|p| p.0),
        orders: matches,
        max_order_error,
        orders_match,
    })
}
