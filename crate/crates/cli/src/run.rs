use crate::{CliError, Mode, Report, RunConfig};
use amoebalab_core::classical::{self, ma_total_mass_classical, order_map_classical, rasterize_amoeba, ronkin_field};
use amoebalab_core::generalized::{
    self, build_marked_sphere, hessian_pushforward, ma_total_mass_generalized, monte_carlo_options,
    newton_polytope_generalized, order_map_generalized, verify_fan_limit, verify_recession_theorem, MarkedSphere,
};
use amoebalab_core::geometry::{check_recession, component_ppm, ComponentMap, Grid};
use amoebalab_core::superform::{potential_from_current_with, suite, GridField};
use amoebalab_core::{Error, LaurentPolynomial};
use num_complex::Complex64;
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;

/// Random segment pairs per component in the convexity test.
/// Largest distance of a classical order from its rounded lattice point.
const ORDER_ROUNDING_TOL: f64 = 1e-3;
const CONVEX_TRIALS: usize = 500;
/// Classical MA mass against the Newton polytope area.
const CLASSICAL_MA_TOL: f64 = 0.02;
/// Generalized MA mass against the area of the fitted Newton polytope.
const GENERALIZED_MA_TOL: f64 = 0.05;
/// Classical and generalized masks, in cells.
const MASK_HAUSDORFF_CELLS: f64 = 2.0;
const RECESSION_VERTEX_TOL: f64 = 0.1;
const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Default)]
struct Artifacts {
    ppm: Option<Vec<u8>>,
    csv: Option<String>,
}

fn at<T>(check: &str, r: amoebalab_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Numeric { check: check.into(), source })
}

fn config<T>(r: amoebalab_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Runs the configured mode, writes the requested artifacts and returns
/// the report. Numerical failures are recorded in the report (and the
/// report is still written); configuration and i/o problems are errors.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut rep = Report::new(cfg.clone());
    let mut art = Artifacts::default();
    let out = match cfg.mode {
        Mode::Classical => run_classical(cfg, &mut rep, &mut art),
        Mode::Generalized => run_generalized(cfg, &mut rep, &mut art),
        Mode::SuperformCheck => run_superform(cfg, &mut rep),
        Mode::FanLimit => run_fan_limit(cfg, &mut rep),
    };
    match out {
        Ok(()) => {}
        Err(CliError::Numeric { check, source }) => rep.fail(&check, source.to_string()),
        Err(e) => return Err(e),
    }
    if let (Some(p), Some(b)) = (&cfg.emit, &art.ppm) {
        write(p, b)?;
    }
    if let (Some(p), Some(s)) = (&cfg.csv, &art.csv) {
        write(p, s.as_bytes())?;
    }
    if let Some(p) = &cfg.report {
        write(p, rep.to_json().as_bytes())?;
    }
    Ok(rep)
}

fn grid_of(cfg: &RunConfig, shape: [usize; 2]) -> Result<Grid, CliError> {
    config(Grid::from_box(&cfg.box_, shape.to_vec()))
}

/// `x1,x2,value` per grid node, `%.17g`-style shortest round-trip floats.
pub fn field_csv(f: &GridField) -> String {
    let (n1, n2) = f.grid.n2();
    let mut s = String::from("x1,x2,value\n");
    for i in 0..=n1 {
        for j in 0..=n2 {
            let x = f.grid.node(i, j);
            let _ = writeln!(s, "{},{},{}", x[0], x[1], f.at(i, j));
        }
    }
    s
}

fn component_summary(comps: &ComponentMap) -> serde_json::Value {
    let list: Vec<_> = (1..=comps.count)
        .map(|id| json!({"id": id, "cells": comps.size(id), "touches_boundary": comps.touches_boundary(id)}))
        .collect();
    json!({"count": comps.count, "components": list})
}

fn convexity(rep: &mut Report, comps: &ComponentMap) {
    let bad: Vec<u32> = (1..=comps.count).filter(|&id| !comps.is_convex_region(id, CONVEX_TRIALS)).collect();
    rep.result("nonconvex_components", &bad);
    rep.holds("components_convex", bad.is_empty());
}

fn max_mismatch(r: &amoebalab_core::geometry::RecessionReport) -> f64 {
    r.entries.iter().map(|e| if e.mismatch_deg.is_nan() { f64::INFINITY } else { e.mismatch_deg }).fold(0.0, f64::max)
}

fn run_classical(cfg: &RunConfig, rep: &mut Report, art: &mut Artifacts) -> Result<(), CliError> {
    let text = cfg.poly.as_deref().unwrap_or_default();
    let f = config(LaurentPolynomial::parse(text, 2))?;
    let grid = grid_of(cfg, cfg.grid)?;
    rep.result("polynomial", &f.to_string());

    let raster = at("raster", rasterize_amoeba(&f, &grid, cfg.fibers_used(), cfg.angles))?;
    let comps = raster.components();
    rep.result("raster", &json!({"occupied_cells": raster.occupied(), "degenerate_fibers": raster.degenerate_fibers}));
    rep.result("components", &component_summary(&comps));
    art.ppm = Some(component_ppm(&comps));

    let om = at("order_map", order_map_classical(&f, &comps, cfg.nq))?;
    rep.result("orders", &om.orders);
    rep.result("newton_polytope", &om.polytope);
    let ur = rep.tol("order_rounding", ORDER_ROUNDING_TOL);
    rep.at_most("order_rounding", om.max_rounding_distance(), ur);
    rep.holds("orders_injective", om.injective);
    rep.holds("orders_in_polytope", om.inside_polytope);
    convexity(rep, &comps);

    let th = rep.tol("recession_deg", generalized::ronkin::RECESSION_THRESHOLD_DEG);
    let vt = rep.tol("recession_vertex", RECESSION_VERTEX_TOL);
    let rec = check_recession(&comps, &om.polytope, &om.pairs(), grid.diagonal(), th, vt);
    rep.result("recession", &rec);
    rep.push("recession_cones", rec.all_pass, max_mismatch(&rec), th);

    let mg = grid_of(cfg, [cfg.ma_grid, cfg.ma_grid])?;
    let ma = at("ma_mass", ma_total_mass_classical(&f, &mg, cfg.nq))?;
    rep.result("ma", &json!({"mass": ma.mass, "newton_area": ma.newton_area, "max_escape": ma.max_escape,
        "samples": ma.samples, "fallback_samples": ma.fallback_samples}));
    let esc = rep.tol("ma_gradient_escape", classical::ESCAPE_TOL);
    rep.at_most("ma_gradient_escape", ma.max_escape, esc);
    let mt = rep.tol("ma_mass", CLASSICAL_MA_TOL);
    rep.at_most("ma_mass", (ma.mass - ma.newton_area).abs(), mt);

    if cfg.csv.is_some() {
        art.csv = Some(field_csv(&at("ronkin_field", ronkin_field(&f, &grid, cfg.nq))?));
    }
    Ok(())
}

fn sphere(cfg: &RunConfig) -> Result<MarkedSphere, CliError> {
    let c = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
    let points = cfg.points.as_ref().map(|v| v.iter().map(c).collect()).unwrap_or_default();
    config(build_marked_sphere(points, cfg.residues.clone().unwrap_or_default(), c(&cfg.base_point)))
}

fn potential_check(e: &Error) -> &'static str {
    match e {
        Error::NotSymmetric { .. } => "potential_symmetry",
        Error::NotClosed { .. } => "potential_closedness",
        Error::NotConvex { .. } => "potential_convexity",
        _ => "potential",
    }
}

fn run_generalized(cfg: &RunConfig, rep: &mut Report, art: &mut Artifacts) -> Result<(), CliError> {
    let ms = sphere(cfg)?;
    if ms.dim() != 2 {
        return Err(CliError::Config(format!("generalized mode needs 2 residue rows, got {}", ms.dim())));
    }
    let seed = cfg.seed.unwrap_or_default();
    let grid = grid_of(cfg, cfg.grid)?;
    rep.result("marked_sphere", &ms);
    rep.result("residue_at_infinity", &ms.residue_at_infinity());
    rep.result("fan", &ms.asymptotic_fan());
    rep.result("nondegeneracy", &ms.nondegeneracy());

    let opts = monte_carlo_options(cfg.eps);
    rep.tol("current_symmetry", opts.symmetry_tol);
    rep.tol("potential_closedness", opts.closedness_tol);
    rep.tol("potential_convexity", opts.convexity_tol);
    rep.tol("current_positivity", POSITIVITY_TOL);

    let m = at("pushforward", hessian_pushforward(&ms, &grid, cfg.samples, cfg.delta, seed))?;
    rep.result("monte_carlo", &m);
    let comps = m.components();
    rep.result("components", &component_summary(&comps));
    art.ppm = Some(component_ppm(&comps));

    let cur = &m.current;
    let scale = cur.max_cell_mass();
    let asym = if scale > 0.0 { cur.asymmetry() / scale } else { 0.0 };
    rep.at_most("current_symmetry", asym, opts.symmetry_tol);
    let pos = at("current_positivity", cur.min_positivity_pairing(cfg.positivity_trials, seed))?;
    let total = cur.total_abs_mass();
    let rel = if total > 0.0 { (-pos / total).max(0.0) } else { 0.0 };
    rep.at_most("current_positivity", rel, POSITIVITY_TOL);

    let pot = potential_from_current_with(cur, &opts).map_err(|e| CliError::Numeric { check: potential_check(&e).into(), source: e })?;
    rep.result("potential", &json!({"path_residual": pot.path_residual, "reconstruction_error": pot.reconstruction_error,
        "min_second_difference": pot.min_second_difference, "margin_cells": opts.margin()}));
    rep.at_most("potential_closedness", pot.path_residual, opts.closedness_tol);
    rep.at_most("potential_convexity", (-pot.min_second_difference).max(0.0), opts.convexity_tol);
    let r = &pot.potential;
    if cfg.csv.is_some() {
        art.csv = Some(field_csv(r));
    }

    let map = order_map_generalized(r, &comps, cfg.eps);
    rep.result("orders", &map);
    rep.tol("order_distinct", generalized::ronkin::DISTINCT_TOL);
    at("order_map", map.check())?;
    rep.holds("orders_injective", map.injective);
    let newton = at("newton_polytope", newton_polytope_generalized(&map))?;
    rep.result("newton_polytope", &json!({"polytope": newton, "area": newton.area()}));
    convexity(rep, &comps);

    let th = rep.tol("recession_deg", generalized::ronkin::RECESSION_THRESHOLD_DEG);
    let rec = at("recession_cones", verify_recession_theorem(&comps, &map, grid.diagonal(), th))?;
    rep.result("recession", &rec);
    rep.push("recession_cones", rec.all_pass, max_mismatch(&rec), th);

    let ma = at("ma_mass", ma_total_mass_generalized(r, &newton, opts.margin()))?;
    rep.result("ma", &ma);
    let esc = rep.tol("ma_gradient_escape", generalized::ronkin::ESCAPE_TOL);
    rep.at_most("ma_gradient_escape", ma.max_escape, esc);
    let gap = rep.tol("ma_vertex_gap", generalized::ronkin::VERTEX_GAP_TOL);
    rep.at_most("ma_vertex_gap", ma.max_vertex_gap, gap);
    let mt = rep.tol("ma_mass", GENERALIZED_MA_TOL);
    rep.at_most("ma_mass", (ma.mass - ma.newton_area).abs(), mt);

    if let Some(text) = &cfg.compare_classical {
        let f = config(LaurentPolynomial::parse(text, 2))?;
        let off = ms.offset();
        let cmp = at(
            "compare_classical",
            generalized::compare_with_classical(r, &comps, &map, &f, [off[0], off[1]], cfg.nq, cfg.fibers_used(), cfg.angles),
        )?;
        let rt = rep.tol("classical_ronkin_affine", generalized::compare::RONKIN_TOL);
        rep.at_most("classical_ronkin_affine", cmp.max_deviation, rt);
        let ot = rep.tol("classical_orders", generalized::compare::ORDER_TOL);
        rep.push("classical_orders", cmp.orders_match, cmp.max_order_error, ot);
        let cells = grid.h(0).max(grid.h(1)) * MASK_HAUSDORFF_CELLS;
        rep.tol("classical_mask_hausdorff_cells", MASK_HAUSDORFF_CELLS);
        rep.at_most("classical_mask_hausdorff", cmp.amoeba_hausdorff, cells);
        let area = config(f.support_polytope())?.area();
        rep.tol("classical_newton_area", GENERALIZED_MA_TOL);
        rep.at_most("classical_newton_area", (newton.area() - area).abs(), GENERALIZED_MA_TOL);
        rep.at_most("classical_ma_mass", (ma.mass - area).abs(), GENERALIZED_MA_TOL);
        rep.result("classical_comparison", &cmp);
    }
    Ok(())
}

fn run_superform(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let seed = cfg.seed.unwrap_or_default();
    let it = rep.tol("identity", suite::IDENTITY_TOL);
    let c = at("calculus", suite::calculus_suite(cfg.cases, seed))?;
    rep.at_most("dprime_dprime", c.max_dprime_dprime, it);
    rep.at_most("dsecond_dsecond", c.max_dsecond_dsecond, it);
    rep.at_most("dprime_dsecond_anticommute", c.max_anticommutator, it);
    rep.at_most("boundary_integral", c.max_boundary_integral, it);
    rep.result("calculus", &c);
    let mut rules = Vec::new();
    for m in [2, 3] {
        let s = at("sign_rules", suite::sign_rule_suite(m))?;
        rep.push(&format!("wedge_sign_m{m}"), s.wedge_failures == 0, s.wedge_failures as f64, 0.0);
        rep.push(&format!("involution_m{m}"), s.involution_failures == 0, s.involution_failures as f64, 0.0);
        rules.push(s);
    }
    rep.result("sign_rules", &rules);
    let tt = rep.tol("theta", suite::THETA_TOL);
    let t = at("theta", suite::theta_suite(cfg.forms, cfg.torus_points, seed.wrapping_add(1)))?;
    for (name, v) in &t.max_residual {
        rep.at_most(&format!("theta_{name}"), *v, tt);
    }
    rep.result("theta", &t);
    Ok(())
}

fn run_fan_limit(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let ms = sphere(cfg)?;
    rep.result("marked_sphere", &ms);
    rep.result("fan", &ms.asymptotic_fan());
    rep.tol("monotone_slack", generalized::fan_limit::MONOTONE_SLACK);
    rep.tol("contraction", generalized::fan_limit::CONTRACTION);
    let seed = cfg.seed.unwrap_or_default();
    let r = at("fan_limit", verify_fan_limit(&ms, &cfg.ts, cfg.box_, cfg.samples, cfg.delta, seed))?;
    rep.holds("fan_monotone", r.monotone);
    let last = r.distances[r.distances.len() - 1];
    rep.push("fan_contracts", r.contracts, last / r.distances[0], 1.0 / generalized::fan_limit::CONTRACTION);
    rep.result("fan_limit", &r);
    Ok(())
}
