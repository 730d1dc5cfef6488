//! Acceptance criteria 1-9. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

use amoebalab_core::classical::{
    ma_total_mass_classical, order_map_classical, rasterize_amoeba, ronkin_gradient, ronkin_value,
};
use amoebalab_core::generalized::{
    build_marked_sphere, compare_with_classical, monte_carlo_options, newton_polytope_generalized,
    order_map_generalized, ronkin_generalized, verify_fan_limit, verify_recession_theorem, MarkedSphere,
};
use amoebalab_core::geometry::{check_recession, fit_affine, Grid};
use amoebalab_core::superform::suite::{calculus_suite, set, sign_rule_suite, theta_suite};
use amoebalab_core::superform::theta::theta_at;
use amoebalab_core::superform::{potential_from_current, potential_from_current_with, GridField, PotentialOptions, SuperCurrent11, SuperForm};
use amoebalab_core::{ExactSuperForm, LaurentPolynomial, RationalPoly};
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("runtime {:.1}s over {}s", t.as_secs_f64(), limit.as_secs()))
    } else {
        Ok(t)
    }
}

fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn c1_superform_calculus() -> Outcome {
    let start = Instant::now();
    let r = calculus_suite(200, 1).map_err(|e| e.to_string())?;
    ensure!(r.cases >= 100 && r.pass, "{r:?}");
    ensure!(r.max_dprime_dprime <= 1e-12 && r.max_dsecond_dsecond <= 1e-12 && r.max_anticommutator <= 1e-12, "{r:?}");
    for m in [2, 3] {
        let s = sign_rule_suite(m).map_err(|e| e.to_string())?;
        ensure!(s.pass && s.wedge_cases == 1 << (4 * m), "{s:?}");
    }
    // hand-computed oracle: f = x1^2 x2 has d'd''f = f_jk dx_j (x) dx_k
    let f = RationalPoly::monomial(2, vec![2, 1], q(1));
    let h = ExactSuperForm::hessian_form(&f);
    let want = [
        ((0, 0), RationalPoly::monomial(2, vec![0, 1], q(2))),
        ((0, 1), RationalPoly::monomial(2, vec![1, 0], q(2))),
        ((1, 0), RationalPoly::monomial(2, vec![1, 0], q(2))),
    ];
    for ((j, k), p) in &want {
        ensure!(h.coefficient(set(&[*j]), set(&[*k])) == Some(p), "hessian coefficient ({j},{k})");
    }
    ensure!(h.coefficient(set(&[1]), set(&[1])).map_or(true, |p| p.is_zero()), "f_22 should vanish");
    let f0 = ExactSuperForm::term(2, &[], &[], f).unwrap();
    ensure!(f0.dprime().dsecond() == h.neg(), "d''d' f should be -d'd'' f");
    // (1 (x) dx1) ^ (dx2 (x) 1) = -dx2 (x) dx1
    let one = RationalPoly::constant(2, q(1));
    let a = ExactSuperForm::term(2, &[], &[0], one.clone()).unwrap();
    let b = ExactSuperForm::term(2, &[1], &[], one.clone()).unwrap();
    let ab = a.wedge(&b).unwrap();
    ensure!(ab == ExactSuperForm::term(2, &[1], &[0], RationalPoly::constant(2, q(-1))).unwrap(), "wedge sign");
    ensure!(b.wedge(&a).unwrap() == ExactSuperForm::term(2, &[1], &[0], one).unwrap(), "wedge sign");
    let t = within(start, Duration::from_secs(5))?;
    Ok(format!("{} cases, max residual {:.1e}, {:.2}s", r.cases, r.max_anticommutator.max(r.max_dprime_dprime), t.as_secs_f64()))
}

fn c2_theta() -> Outcome {
    let start = Instant::now();
    let r = theta_suite(50, 20, 2).map_err(|e| e.to_string())?;
    ensure!(r.max_residual.len() == 5, "{r:?}");
    ensure!(r.pass && r.max_residual.iter().all(|(_, v)| *v <= 1e-8), "{r:?}");
    // oracle: Theta(dx1) = dz/z / (2 sqrt pi), Theta(1 (x) dx1) = i dzbar/zbar / (2 sqrt pi)
    let k = 0.5 / std::f64::consts::PI.sqrt();
    let z = [c(0.7, -1.3)];
    let one = amoebalab_core::RealPoly::constant(1, 1.0);
    let w = SuperForm::term(1, &[0], &[], one.clone()).unwrap();
    let got = theta_at(&w, &z).coeffs.get(&1).copied().unwrap_or_default();
    ensure!((got - z[0].inv() * k).norm() < 1e-14, "Theta(dx1) = {got}");
    let w = SuperForm::term(1, &[], &[0], one).unwrap();
    let got = theta_at(&w, &z).coeffs.get(&2).copied().unwrap_or_default();
    ensure!((got - c(0.0, 1.0) * z[0].conj().inv() * k).norm() < 1e-14, "Theta(1 (x) dx1) = {got}");
    let t = within(start, Duration::from_secs(10))?;
    let worst = r.max_residual.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(format!("50 forms x 20 points, max residual {worst:.1e}, {:.2}s", t.as_secs_f64()))
}

fn line() -> LaurentPolynomial {
    LaurentPolynomial::parse("1+z1+z2", 2).unwrap()
}

fn c3_classical_line() -> Outcome {
    let start = Instant::now();
    let f = line();
    let g = Grid::square(-6.0, 6.0, 300).unwrap();
    let comps = rasterize_amoeba(&f, &g, 600, 64).map_err(|e| e.to_string())?.components();
    ensure!(comps.count == 3, "{} components", comps.count);
    for id in 1..=3 {
        ensure!(comps.is_convex_region(id, 500), "component {id} not convex");
    }
    let om = order_map_classical(&f, &comps, 256).map_err(|e| e.to_string())?;
    let mut rounded: Vec<[i64; 2]> = om.orders.iter().map(|o| o.rounded).collect();
    rounded.sort();
    ensure!(rounded == vec![[0, 0], [0, 1], [1, 0]], "orders {rounded:?}");
    ensure!(om.max_rounding_distance() <= 1e-3, "rounding {}", om.max_rounding_distance());
    let rec = check_recession(&comps, &om.polytope, &om.pairs(), g.diagonal(), 3.0, 0.1);
    ensure!(rec.all_pass, "{rec:?}");
    let ma = ma_total_mass_classical(&f, &Grid::square(-6.0, 6.0, 60).unwrap(), 256).map_err(|e| e.to_string())?;
    ensure!((ma.mass - 0.5).abs() <= 0.02, "MA mass {}", ma.mass);
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("3 components, MA mass {:.4}, {:.1}s", ma.mass, t.as_secs_f64()))
}

fn c4_ronkin() -> Outcome {
    let f = line();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let y = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let t: f64 = rng.gen_range(0.0..1.0);
        let z = [t * x[0] + (1.0 - t) * y[0], t * x[1] + (1.0 - t) * y[1]];
        let v = |p| ronkin_value(&f, p, 256).unwrap();
        worst = worst.max(v(z) - t * v(x) - (1.0 - t) * v(y));
    }
    ensure!(worst <= 1e-7, "convexity gap {worst}");
    // points at least 1.5 from the walls of the tropical line; oracle max(0, x1, x2)
    let regions: [(fn(&mut ChaCha8Rng) -> [f64; 2], [f64; 2]); 3] = [
        (|r| [r.gen_range(-5.0..-1.5), r.gen_range(-5.0..-1.5)], [0.0, 0.0]),
        (|r| { let a = r.gen_range(1.5..5.0); [a, r.gen_range(-5.0..a - 1.5)] }, [1.0, 0.0]),
        (|r| { let b = r.gen_range(1.5..5.0); [r.gen_range(-5.0..b - 1.5), b] }, [0.0, 1.0]),
    ];
    let mut fit_worst = 0.0f64;
    let mut grad_worst = 0.0f64;
    for (draw, nu) in regions {
        let xs: Vec<[f64; 2]> = (0..40).map(|_| draw(&mut rng)).collect();
        let vals: Vec<f64> = xs.iter().map(|x| ronkin_value(&f, *x, 256).unwrap()).collect();
        for (x, v) in xs.iter().zip(&vals) {
            ensure!((v - 0f64.max(x[0]).max(x[1])).abs() < 1e-6, "value at {x:?}");
        }
        let fit = fit_affine(&xs, &vals).map_err(|e| e.to_string())?;
        fit_worst = fit_worst.max(fit.max_residual);
        ensure!((fit.slope[0] - nu[0]).abs() < 1e-4 && (fit.slope[1] - nu[1]).abs() < 1e-4, "slope {:?}", fit.slope);
        for x in &xs {
            let g = ronkin_gradient(&f, *x, 256).unwrap();
            grad_worst = grad_worst.max((g[0] - fit.slope[0]).abs()).max((g[1] - fit.slope[1]).abs());
        }
    }
    ensure!(fit_worst <= 1e-6, "affine residual {fit_worst}");
    ensure!(grad_worst <= 1e-4, "gradient mismatch {grad_worst}");
    Ok(format!("convexity gap {worst:.1e}, affine residual {fit_worst:.1e}, gradient mismatch {grad_worst:.1e}"))
}

fn c5_potential() -> Outcome {
    let start = Instant::now();
    let g = Grid::square(-1.0, 1.0, 64).unwrap();
    let vol = g.cell_volume();
    let s = SuperCurrent11::uniform(&g, &[vol, 0.0, 0.0, vol]);
    let rep = potential_from_current_with(&s, &PotentialOptions::default()).map_err(|e| e.to_string())?;
    let want = GridField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
    let rms = (rep.potential.values.iter().zip(&want.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        / want.values.len() as f64)
        .sqrt();
    ensure!(rms <= 1e-2, "rms {rms}");
    ensure!(rep.path_residual <= 1e-6, "path residual {}", rep.path_residual);
    let z = potential_from_current(&SuperCurrent11::zero(&g), 3.0).map_err(|e| e.to_string())?;
    ensure!(z.values.iter().all(|v| *v == 0.0), "zero current");
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("rms {rms:.1e}, path residual {:.1e}, {:.2}s", rep.path_residual, t.as_secs_f64()))
}

fn ms1() -> MarkedSphere {
    build_marked_sphere(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![vec![1.0, 0.0], vec![0.0, 1.0]], c(-1.0, 0.0)).unwrap()
}

fn c6_generalized_ms1() -> Outcome {
    let start = Instant::now();
    let ms = ms1();
    let grid = Grid::square(-6.0, 6.0, 200).unwrap();
    let opts = monte_carlo_options(3.0);
    let ronkin = ronkin_generalized(&ms, &grid, 2_000_000, 1e-3, 7, &opts).map_err(|e| e.to_string())?;
    let cur = &ronkin.measure.current;
    ensure!(cur.is_symmetric(1e-2), "asymmetry {}", cur.asymmetry());
    ensure!(cur.is_positive(50, 1e-9).map_err(|e| e.to_string())?, "not positive");
    let comps = ronkin.measure.components();
    ensure!(comps.count == 3, "{} components", comps.count);
    let map = order_map_generalized(ronkin.potential(), &comps, 3.0);
    let newton = newton_polytope_generalized(&map).map_err(|e| e.to_string())?;
    ensure!((newton.area() - 0.5).abs() <= 0.05, "Newton area {}", newton.area());
    let rec = verify_recession_theorem(&comps, &map, grid.diagonal(), 3.0).map_err(|e| e.to_string())?;
    ensure!(rec.all_pass, "{rec:?}");
    let f = LaurentPolynomial::parse("z1-z2-1", 2).unwrap();
    let off = ms.offset();
    let cmp = compare_with_classical(ronkin.potential(), &comps, &map, &f, [off[0], off[1]], 256, 400, 64)
        .map_err(|e| e.to_string())?;
    ensure!(cmp.probes.len() == 25, "{} probes", cmp.probes.len());
    ensure!(cmp.max_deviation <= 5e-2, "deviation {}", cmp.max_deviation);
    ensure!(cmp.orders_match, "{:?}", cmp.orders);
    let t = within(start, Duration::from_secs(300))?;
    Ok(format!(
        "deviation {:.2e}, Newton area {:.4}, order error {:.1e}, {:.1}s",
        cmp.max_deviation,
        newton.area(),
        cmp.max_order_error,
        t.as_secs_f64()
    ))
}

fn c7_fan_limit() -> Outcome {
    let r = verify_fan_limit(&ms1(), &[1.0, 2.0, 4.0, 8.0], [-6.0, 6.0, -6.0, 6.0], 100_000, 1e-3, 3)
        .map_err(|e| e.to_string())?;
    let d = &r.distances;
    ensure!(d.windows(2).all(|w| w[1] <= 1.1 * w[0]), "not monotone {d:?}");
    ensure!(d[3] < d[0] / 3.0, "no contraction {d:?}");
    ensure!(r.pass, "{r:?}");
    Ok(format!("d = {:.3} {:.3} {:.3} {:.3}", d[0], d[1], d[2], d[3]))
}

/// Rank of the real Jacobian of `log_map` from central differences.
fn fd_rank(ms: &MarkedSphere, z: Complex64) -> usize {
    let h = 1e-6 * z.norm().max(1.0);
    let col = |dz: Complex64| {
        let a = ms.log_map(z + dz).unwrap();
        let b = ms.log_map(z - dz).unwrap();
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    let (u, v) = (col(c(h, 0.0)), col(c(0.0, h)));
    let s1 = u[0].hypot(u[1]).max(v[0].hypot(v[1]));
    let det = (u[0] * v[1] - u[1] * v[0]).abs();
    if s1 < 1e-6 {
        0
    } else if det < 1e-6 * s1 * s1.max(1.0) {
        1
    } else {
        2
    }
}

fn c8_critical_rank() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let mut checked = 0;
    for _ in 0..3 {
        let s = rng.gen_range(2..=4);
        let points: Vec<Complex64> = (0..s).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let residues: Vec<Vec<f64>> = (0..2).map(|_| (0..s).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let ms = build_marked_sphere(points.clone(), residues, c(5.0, 5.0)).map_err(|e| e.to_string())?;
        for _ in 0..40 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if points.iter().any(|p| (z - p).norm() < 0.05) {
                continue;
            }
            let a = ms.jacobian_rank(z).map_err(|e| e.to_string())?.rank;
            ensure!(a == fd_rank(&ms, z), "rank {a} vs finite differences at {z}");
            checked += 1;
        }
    }
    ensure!(checked >= 100, "only {checked} points");
    let ms = ms1();
    for k in 0..12 {
        let z = c(-3.0 + 0.5 * k as f64 + 0.13, 0.0);
        let a = ms.jacobian_rank(z).map_err(|e| e.to_string())?.rank;
        ensure!(a == 1 && fd_rank(&ms, z) == 1, "real locus rank {a} at {z}");
    }
    Ok(format!("{checked} random points on 3 spheres, 12 real-locus points"))
}

fn run_bin(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_amoebalab"))
        .args(args)
        .env("AMOEBALAB_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    // a failing check (exit 3) still writes a full report
    ensure!(matches!(out.status.code(), Some(0 | 3)), "{args:?} exited {:?}", out.status.code());
    Ok(out.stdout)
}

fn c9_determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["superform-check", "--seed", "9", "--cases", "50", "--forms", "10", "--torus-points", "5"],
        &["classical", "--poly", "1+z1+z2", "--grid", "60"],
        &["generalized", "--points", "0,1", "--residues", "1,0;0,1", "--seed", "9", "--samples", "2e5", "--grid", "60"],
        &["fan-limit", "--points", "0,1", "--residues", "1,0;0,1", "--seed", "9", "--samples", "2e4"],
    ];
    for args in runs {
        let a = run_bin(args, "1")?;
        let b = run_bin(args, "1")?;
        let c = run_bin(args, "3")?;
        ensure!(!a.is_empty() && a == b && a == c, "{} reports differ", args[0]);
    }
    Ok("4 modes, byte-identical across reruns and thread counts".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("superform calculus", c1_superform_calculus),
        ("theta correspondence", c2_theta),
        ("classical line amoeba", c3_classical_line),
        ("ronkin properties", c4_ronkin),
        ("potential recovery", c5_potential),
        ("generalized MS1 pipeline", c6_generalized_ms1),
        ("asymptotic fan limit", c7_fan_limit),
        ("critical rank", c8_critical_rank),
        ("determinism", c9_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {} {name} ({secs:.1}s): {msg}", k + 1),
            Err(msg) => {
                println!("FAIL {} {name} ({secs:.1}s): {msg}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
