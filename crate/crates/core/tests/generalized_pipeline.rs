use amoebalab_core::generalized::{
    build_marked_sphere, compare_with_classical, hessian_pushforward, ma_total_mass_generalized, monte_carlo_options,
    newton_polytope_generalized, order_map_generalized, ronkin_generalized, verify_fan_limit, verify_recession_theorem,
    GeneralizedMaReport, GeneralizedOrderMap, GeneralizedRonkin, MarkedSphere, SamplingPlan,
};
use amoebalab_core::geometry::{fit_affine, ComponentMap, Grid, Polytope};
use amoebalab_core::LaurentPolynomial;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const EPS: f64 = 3.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ms1(z0: Complex64) -> MarkedSphere {
    build_marked_sphere(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![vec![1.0, 0.0], vec![0.0, 1.0]], z0).unwrap()
}

struct Run {
    grid: Grid,
    ronkin: GeneralizedRonkin,
    comps: ComponentMap,
    map: GeneralizedOrderMap,
    newton: Polytope,
    ma: GeneralizedMaReport,
}

fn pipeline(ms: &MarkedSphere, half: f64, n: usize, samples: usize, seed: u64) -> Run {
    let grid = Grid::square(-half, half, n).unwrap();
    let opts = monte_carlo_options(EPS);
    let ronkin = ronkin_generalized(ms, &grid, samples, 1e-3, seed, &opts).unwrap();
    let comps = ronkin.measure.components();
    let map = order_map_generalized(ronkin.potential(), &comps, EPS);
    let newton = newton_polytope_generalized(&map).unwrap();
    let ma = ma_total_mass_generalized(ronkin.potential(), &newton, opts.margin()).unwrap();
    Run { grid, ronkin, comps, map, newton, ma }
}

fn sorted_edges(p: &Polytope) -> Vec<f64> {
    let n = p.vertices.len();
    let mut e: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = (p.vertex2(k), p.vertex2((k + 1) % n));
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn ms1_agrees_with_the_classical_line() {
    let ms = ms1(c(-1.0, 0.0));
    let r = pipeline(&ms, 6.0, 200, 2_000_000, 7);
    let cur = &r.ronkin.measure.current;
    assert!(cur.is_symmetric(1e-2));
    assert!(cur.is_positive(30, 1e-9).unwrap());
    assert_eq!(r.comps.count, 3);
    r.map.check().unwrap();
    // unit triangle up to translation: edges 1, 1, sqrt 2
    let e = sorted_edges(&r.newton);
    assert_eq!(e.len(), 3);
    for (got, want) in e.iter().zip([1.0, 1.0, 2f64.sqrt()]) {
        assert!((got - want).abs() < 0.03, "{e:?}");
    }
    assert!((r.newton.area() - 0.5).abs() <= 0.05);
    assert!((r.ma.mass - 0.5).abs() <= 0.05, "{:?}", r.ma);
    r.ma.check().unwrap();
    let rec = verify_recession_theorem(&r.comps, &r.map, r.grid.diagonal(), 3.0).unwrap();
    assert!(rec.all_pass, "{rec:?}");

    // the curve is {(z, z - 1)}; Log differs from the classical coordinates
    // by the base point offset (log|z0|, log|z0 - 1|) = (0, ln 2)
    let off = ms.offset();
    assert!(off[0].abs() < 1e-15 && (off[1] - 2f64.ln()).abs() < 1e-15);
    let f = LaurentPolynomial::parse("z1-z2-1", 2).unwrap();
    let cmp = compare_with_classical(r.ronkin.potential(), &r.comps, &r.map, &f, [off[0], off[1]], 256, 400, 64).unwrap();
    assert!(cmp.max_deviation <= 5e-2, "{cmp:?}");
    assert_eq!(cmp.classical_components, 3);
    assert!(cmp.orders_match, "{cmp:?}");
    assert!(cmp.amoeba_hausdorff <= 2.0 * r.grid.h(0));
}

#[test]
fn sphere_with_poles_at_zero_and_minus_one_is_the_line_one_plus_z1_plus_z2() {
    // Log = (log|z|, log|z + 1|) is the amoeba of 1 + z1 + z2; at
    // z0 = e^{2 pi i / 3} both logs vanish
    let z0 = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let ms = build_marked_sphere(vec![c(0.0, 0.0), c(-1.0, 0.0)], vec![vec![1.0, 0.0], vec![0.0, 1.0]], z0).unwrap();
    assert!(ms.offset().iter().all(|v| v.abs() < 1e-12));
    let r = pipeline(&ms, 6.0, 120, 1_000_000, 11);
    assert_eq!(r.comps.count, 3);
    let f = LaurentPolynomial::parse("1+z1+z2", 2).unwrap();
    let cmp = compare_with_classical(r.ronkin.potential(), &r.comps, &r.map, &f, [0.0, 0.0], 256, 240, 64).unwrap();
    assert!(cmp.max_deviation <= 5e-2, "{cmp:?}");
    assert!(cmp.orders_match, "{cmp:?}");
}

#[test]
fn scaling_residues_scales_orders_and_mass() {
    // omega -> 2 omega maps Log to 2 Log and the current by 4 up to the
    // change of variables, so R_2(y) = 4 R(y / 2) up to affine
    let ms = ms1(c(-1.0, 0.0));
    let a = pipeline(&ms, 6.0, 200, 2_000_000, 5);
    let b = pipeline(&ms.scaled(2.0), 12.0, 200, 2_000_000, 5);
    assert_eq!(b.comps.count, 3);
    for (x, y) in sorted_edges(&a.newton).iter().zip(sorted_edges(&b.newton)) {
        assert!((2.0 * x - y).abs() < 0.05 * y, "{x} {y}");
    }
    assert!((b.newton.area() - 4.0 * a.newton.area()).abs() <= 0.05 * 4.0 * a.newton.area());
    assert!((b.ma.mass - 2.0).abs() <= 0.1, "{:?}", b.ma);
    let mut probes = Vec::new();
    let mut diffs = Vec::new();
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..5 {
        for j in 0..5 {
            let y = [-8.0 + 4.0 * i as f64, -8.0 + 4.0 * j as f64];
            let rb = b.ronkin.potential().interpolate(y);
            let ra = a.ronkin.potential().interpolate([y[0] / 2.0, y[1] / 2.0]);
            probes.push(y);
            diffs.push(rb - 4.0 * ra);
            range = (range.0.min(rb), range.1.max(rb));
        }
    }
    let fit = fit_affine(&probes, &diffs).unwrap();
    assert!(fit.max_residual <= 0.05 * (range.1 - range.0), "{fit:?} {range:?}");
}

#[test]
fn doubling_samples_changes_mass_by_less_than_monte_carlo_error() {
    let ms = ms1(c(-1.0, 0.0));
    let grid = Grid::square(-6.0, 6.0, 60).unwrap();
    for n in [200_000usize, 400_000] {
        let a = hessian_pushforward(&ms, &grid, n, 1e-3, 9).unwrap();
        let b = hessian_pushforward(&ms, &grid, 2 * n, 1e-3, 9).unwrap();
        let (ta, tb) = (a.current.trace_mass(), b.current.trace_mass());
        let rel = (ta - tb).abs() / ta;
        assert!(rel < 2.0 / (n as f64).sqrt(), "{n}: {rel}");
    }
}

#[test]
fn degenerate_sphere_has_empty_amoeba() {
    let ms = build_marked_sphere(vec![c(0.0, 0.0)], vec![vec![0.0], vec![0.0]], c(1.0, 0.0)).unwrap();
    assert!(ms.is_degenerate());
    let nd = ms.nondegeneracy();
    assert!(!nd.nondegenerate && nd.fan_dim == 0 && nd.consistent);
    assert!(ms.asymptotic_fan().all_zero);
    let r = pipeline(&ms, 4.0, 32, 20_000, 1);
    assert_eq!(r.comps.count, 1);
    assert!(r.ronkin.measure.amoeba_mask.iter().all(|b| !b));
    assert_eq!(r.map.orders.len(), 1);
    assert!(r.map.orders[0].nu.iter().all(|v| v.abs() < 1e-12));
    assert_eq!(r.ma.mass, 0.0);
    let rec = verify_recession_theorem(&r.comps, &r.map, r.grid.diagonal(), 3.0).unwrap();
    assert!(rec.all_pass, "{rec:?}");
}

#[test]
fn fan_limit_for_ms1_and_a_three_point_sphere() {
    let bx = [-6.0, 6.0, -6.0, 6.0];
    let r = verify_fan_limit(&ms1(c(-1.0, 0.0)), &[1.0, 2.0, 4.0, 8.0], bx, 100_000, 1e-3, 3).unwrap();
    assert!(r.pass && r.distances[3] < r.distances[0] / 3.0, "{r:?}");
    // oracle: the tentacles are asymptotic to the rays at distance O(1), so
    // t d(t) stays bounded
    assert!(r.ts.iter().zip(&r.distances).all(|(t, d)| t * d <= 1.5 * r.distances[0]));
    let ms = build_marked_sphere(
        vec![c(0.0, 0.0), c(0.0, 2.0), c(-1.5, -0.5)],
        vec![vec![1.0, 0.0, -0.5], vec![0.5, 1.0, 0.0]],
        c(3.0, 1.0),
    )
    .unwrap();
    let r = verify_fan_limit(&ms, &[1.0, 2.0, 4.0, 8.0], bx, 100_000, 1e-3, 4).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn collinear_rays_give_an_exact_line() {
    // one finite point with residues (1, 0): x2 = 0 identically, so the
    // amoeba is the fan support at every scale
    let ms = build_marked_sphere(vec![c(0.0, 0.0)], vec![vec![1.0], vec![0.0]], c(1.0, 0.0)).unwrap();
    let r = verify_fan_limit(&ms, &[1.0, 2.0], [-6.0, 6.0, -6.0, 6.0], 50_000, 1e-3, 5).unwrap();
    assert!(r.monotone);
    assert!(r.distances.iter().all(|d| *d <= r.spacing), "{r:?}");
}

/// Singular values of the real 2x2 Jacobian of `log_map` by central
/// differences in `Re z`, `Im z`.
fn fd_singular_values(ms: &MarkedSphere, z: Complex64) -> [f64; 2] {
    let h = 1e-6 * z.norm().max(1.0);
    let col = |dz: Complex64| {
        let a = ms.log_map(z + dz).unwrap();
        let b = ms.log_map(z - dz).unwrap();
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    let (u, v) = (col(c(h, 0.0)), col(c(0.0, h)));
    // J = [u v]; singular values from trace and determinant of J^T J
    let (a, b, d) = (u[0] * u[0] + u[1] * u[1], u[0] * v[0] + u[1] * v[1], v[0] * v[0] + v[1] * v[1]);
    let det = (u[0] * v[1] - u[1] * v[0]).abs();
    let s1 = (0.5 * (a + d + ((a - d).powi(2) + 4.0 * b * b).sqrt())).sqrt();
    [s1, if s1 > 0.0 { det / s1 } else { 0.0 }]
}

fn fd_rank(ms: &MarkedSphere, z: Complex64) -> usize {
    let s = fd_singular_values(ms, z);
    if s[0] < 1e-6 {
        0
    } else if s[1] < 1e-6 * s[0].max(1.0) {
        1
    } else {
        2
    }
}

#[test]
fn critical_rank_formula_matches_finite_differences() {
    let ms = ms1(c(-1.0, 0.0));
    assert_eq!(ms.jacobian_rank(c(0.0, 1.0)).unwrap().rank, 2);
    assert!(fd_singular_values(&ms, c(0.0, 1.0))[1] > 1e-6);
    assert_eq!(ms.jacobian_rank(c(0.5, 0.0)).unwrap().rank, 1);
    assert!(fd_singular_values(&ms, c(0.5, 0.0))[1] < 1e-8);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for _ in 0..3 {
        let s = rng.gen_range(2..=4);
        let points: Vec<Complex64> = (0..s).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let residues: Vec<Vec<f64>> = (0..2).map(|_| (0..s).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let ms = build_marked_sphere(points.clone(), residues, c(5.0, 5.0)).unwrap();
        for _ in 0..40 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if points.iter().any(|p| (z - p).norm() < 0.05) {
                continue;
            }
            assert_eq!(ms.jacobian_rank(z).unwrap().rank, fd_rank(&ms, z), "z = {z}");
            checked += 1;
        }
    }
    assert!(checked >= 100);
    // real locus of MS1: the differentials are real there and the rank drops
    for k in 0..12 {
        let x = -3.0 + 0.5 * k as f64 + 0.13;
        let z = c(x, 0.0);
        assert_eq!(ms.jacobian_rank(z).unwrap().rank, 1, "{x}");
        assert_eq!(fd_rank(&ms, z), 1, "{x}");
    }
}

#[test]
fn preimages_of_a_bounded_box_stay_away_from_poles_and_infinity() {
    let ms = ms1(c(-1.0, 0.0));
    let bx = [-3.0, 3.0, -3.0, 3.0];
    let bounds = |n: usize| {
        let plan = SamplingPlan::new(&ms, n, 1e-3, bx);
        let mut near = f64::INFINITY;
        let mut far = 0.0f64;
        for s in plan.samples(2, 0) {
            let x = ms.log_map(s.z).unwrap();
            if x[0] >= bx[0] && x[0] <= bx[1] && x[1] >= bx[2] && x[1] <= bx[3] {
                near = near.min(ms.points.iter().map(|p| (s.z - p).norm()).fold(f64::INFINITY, f64::min));
                far = far.max(s.z.norm());
            }
        }
        (near, far)
    };
    let (a, b) = (bounds(50_000), bounds(400_000));
    // Log_j = log|z - p_j| +- const, so |z - p_j| >= e^{-3} / const
    assert!(a.0 > 0.0 && a.1.is_finite());
    assert!(b.0 <= a.0 && b.0 > 0.5 * a.0, "{a:?} {b:?}");
    assert!(b.1 >= a.1 && b.1 < 2.0 * a.1, "{a:?} {b:?}");
    assert!(b.0 >= (-3.0f64).exp() / 2.0 - 1e-9);
    assert!(b.1 <= 2.0 * 3.0f64.exp() + 1.0);
}
