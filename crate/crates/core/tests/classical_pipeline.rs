use amoebalab_core::classical::{
    ma_total_mass_classical, order_map_classical, rasterize_amoeba, ronkin_gradient, ronkin_value,
};
use amoebalab_core::geometry::{check_recession, fit_affine, Grid};
use amoebalab_core::LaurentPolynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line() -> LaurentPolynomial {
    LaurentPolynomial::parse("1+z1+z2", 2).unwrap()
}

/// Off the amoeba of 1 + z1 + z2 the Ronkin function is the dominant
/// monomial's log-modulus: max(0, x1, x2).
fn line_oracle(x: [f64; 2]) -> f64 {
    0.0f64.max(x[0]).max(x[1])
}

#[test]
fn line_amoeba_full_pipeline() {
    let f = line();
    let g = Grid::square(-6.0, 6.0, 300).unwrap();
    let raster = rasterize_amoeba(&f, &g, 600, 64).unwrap();
    let comps = raster.components();
    assert_eq!(comps.count, 3);
    for id in 1..=3 {
        assert!(comps.is_convex_region(id, 500), "component {id}");
    }
    let om = order_map_classical(&f, &comps, 256).unwrap();
    om.check().unwrap();
    let mut rounded: Vec<[i64; 2]> = om.orders.iter().map(|o| o.rounded).collect();
    rounded.sort();
    assert_eq!(rounded, vec![[0, 0], [0, 1], [1, 0]]);
    assert!(om.max_rounding_distance() <= 1e-3);
    // the order is the gradient of the oracle at the probe point
    for o in &om.orders {
        let x = o.point;
        let want = if x[0] > 0.0f64.max(x[1]) {
            [1.0, 0.0]
        } else if x[1] > 0.0f64.max(x[0]) {
            [0.0, 1.0]
        } else {
            [0.0, 0.0]
        };
        assert!((o.nu[0] - want[0]).abs() < 1e-6 && (o.nu[1] - want[1]).abs() < 1e-6, "{o:?}");
    }
    let rec = check_recession(&comps, &om.polytope, &om.pairs(), g.diagonal(), 3.0, 0.1);
    assert!(rec.all_pass, "{rec:?}");
    let ma = ma_total_mass_classical(&f, &Grid::square(-6.0, 6.0, 60).unwrap(), 256).unwrap();
    assert!((ma.mass - 0.5).abs() <= 0.02, "{ma:?}");
}

#[test]
fn order_zero_component_recedes_into_third_quadrant() {
    let f = line();
    let g = Grid::square(-6.0, 6.0, 120).unwrap();
    let comps = rasterize_amoeba(&f, &g, 240, 64).unwrap().components();
    let id = comps.label_at(5, 5);
    let cone = comps.recession_cone_estimate(id, g.diagonal());
    let mut a: Vec<f64> = cone.angles().into_iter().map(f64::to_degrees).collect();
    a.sort_by(f64::total_cmp);
    // normal cone of the triangle at the origin: between (-1, 0) and (0, -1)
    assert!((a[0] - 180.0).abs() <= 3.0 && (a[a.len() - 1] - 270.0).abs() <= 3.0, "{a:?}");
}

#[test]
fn two_term_line_has_two_orders() {
    let f = LaurentPolynomial::parse("z1+z2", 2).unwrap();
    let g = Grid::square(-6.0, 6.0, 120).unwrap();
    let comps = rasterize_amoeba(&f, &g, 240, 64).unwrap().components();
    assert_eq!(comps.count, 2);
    let mut r: Vec<[i64; 2]> = order_map_classical(&f, &comps, 128).unwrap().orders.iter().map(|o| o.rounded).collect();
    r.sort();
    assert_eq!(r, vec![[0, 1], [1, 0]]);
}

#[test]
fn square_polynomial_mass() {
    let f = LaurentPolynomial::parse("1+z1+z2+z1*z2", 2).unwrap();
    let ma = ma_total_mass_classical(&f, &Grid::square(-6.0, 6.0, 60).unwrap(), 256).unwrap();
    assert!((ma.mass - 1.0).abs() <= 0.03, "{ma:?}");
    assert!((ma.newton_area - 1.0).abs() < 1e-12);
}

#[test]
fn ronkin_values_match_the_tropical_oracle() {
    let f = line();
    assert!(ronkin_value(&f, [-10.0, -10.0], 256).unwrap().abs() < 1e-6);
    assert!((ronkin_value(&f, [10.0, 0.0], 256).unwrap() - 10.0).abs() < 1e-6);
    let g = ronkin_gradient(&f, [10.0, 0.0], 256).unwrap();
    assert!((g[0] - 1.0).abs() < 1e-6 && g[1].abs() < 1e-6);
    let g = ronkin_gradient(&f, [-10.0, -10.0], 256).unwrap();
    assert!(g[0].abs() < 1e-6 && g[1].abs() < 1e-6);
}

#[test]
fn ronkin_is_convex_on_random_triples() {
    let f = line();
    // the acceptance target runs 1000 triples
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let y = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let t: f64 = rng.gen_range(0.0..1.0);
        let z = [t * x[0] + (1.0 - t) * y[0], t * x[1] + (1.0 - t) * y[1]];
        let gap = ronkin_value(&f, z, 256).unwrap()
            - t * ronkin_value(&f, x, 256).unwrap()
            - (1.0 - t) * ronkin_value(&f, y, 256).unwrap();
        worst = worst.max(gap);
    }
    assert!(worst <= 1e-7, "{worst}");
}

#[test]
fn ronkin_is_affine_on_complement_components() {
    let f = line();
    // points at least 1.5 away from every wall of the tropical line
    let regions: [(fn(&mut ChaCha8Rng) -> [f64; 2], [f64; 2]); 3] = [
        (|r| [r.gen_range(-5.0..-1.5), r.gen_range(-5.0..-1.5)], [0.0, 0.0]),
        (|r| { let x1 = r.gen_range(1.5..5.0); [x1, r.gen_range(-5.0..x1 - 1.5)] }, [1.0, 0.0]),
        (|r| { let x2 = r.gen_range(1.5..5.0); [r.gen_range(-5.0..x2 - 1.5), x2] }, [0.0, 1.0]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (draw, nu) in regions {
        let xs: Vec<[f64; 2]> = (0..40).map(|_| draw(&mut rng)).collect();
        let vals: Vec<f64> = xs.iter().map(|x| ronkin_value(&f, *x, 256).unwrap()).collect();
        for (x, v) in xs.iter().zip(&vals) {
            assert!((v - line_oracle(*x)).abs() < 1e-6);
        }
        let fit = fit_affine(&xs, &vals).unwrap();
        assert!(fit.max_residual <= 1e-6, "{fit:?}");
        assert!((fit.slope[0] - nu[0]).abs() < 1e-4 && (fit.slope[1] - nu[1]).abs() < 1e-4);
        for x in &xs {
            let g = ronkin_gradient(&f, *x, 256).unwrap();
            assert!((g[0] - fit.slope[0]).abs() <= 1e-4 && (g[1] - fit.slope[1]).abs() <= 1e-4);
        }
    }
}
