//! Randomized checks of the superform calculus and of the Theta map.

use super::{index_set, indices, theta_residual, SuperForm, ThetaIdentity, VolumeConvention};
use crate::error::Result;
use crate::poly::Poly;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

pub const IDENTITY_TOL: f64 = 1e-12;
pub const THETA_TOL: f64 = 1e-8;
pub const THETA_TAGS: [&str; 5] = ["homomorphism", "dprime", "dsecond", "involution", "integral"];

/// All index sets of `{0..m}` with `k` elements.
pub fn subsets(m: usize, k: usize) -> Vec<u32> {
    (0u32..1 << m).filter(|s| s.count_ones() as usize == k).collect()
}

/// Random rational polynomial of total degree at most `deg`.
pub fn random_rational_poly(m: usize, deg: u32, rng: &mut impl Rng) -> Poly<Rational64> {
    let n = rng.gen_range(1..=4);
    Poly::from_terms(
        m,
        (0..n).map(|_| {
            let mut e = vec![0u32; m];
            let mut left = rng.gen_range(0..=deg);
            for k in 0..m {
                let take = if k + 1 == m { left } else { rng.gen_range(0..=left) };
                e[k] = take;
                left -= take;
            }
            (e, Rational64::new(rng.gen_range(-9..=9), rng.gen_range(1..=4)))
        }),
    )
}

/// Random real polynomial of total degree at most `deg`, coefficients in [-1, 1].
pub fn random_real_poly(m: usize, deg: u32, rng: &mut impl Rng) -> Poly<f64> {
    let n = rng.gen_range(1..=4);
    Poly::from_terms(
        m,
        (0..n).map(|_| {
            let e: Vec<u32> = (0..m).map(|_| rng.gen_range(0..=deg)).collect();
            let total: u32 = e.iter().sum();
            let e = if total > deg { vec![0; m] } else { e };
            (e, rng.gen_range(-1.0..=1.0))
        }),
    )
}

/// Random `(p, q)`-form whose coefficients come from `coeff`.
pub fn random_form<T: crate::Scalar>(
    m: usize,
    p: usize,
    q: usize,
    rng: &mut ChaCha8Rng,
    mut coeff: impl FnMut(&mut ChaCha8Rng) -> Poly<T>,
) -> SuperForm<Poly<T>> {
    let mut w = SuperForm::zero(m, p, q);
    for j in subsets(m, p) {
        for k in subsets(m, q) {
            if rng.gen_bool(0.7) {
                let t = SuperForm::term(m, &indices(j), &indices(k), coeff(rng)).expect("valid indices");
                w = w.add(&t).expect("same bidegree");
            }
        }
    }
    w
}

#[derive(Debug, Clone, Serialize)]
pub struct CalculusReport {
    pub cases: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_dprime_dprime: f64,
    pub max_dsecond_dsecond: f64,
    /// `d'd'' + d''d'`.
    pub max_anticommutator: f64,
    /// `int d'' phi` over the support box of a bump-weighted form.
    pub max_boundary_integral: f64,
    pub pass: bool,
}

/// `d'd' = 0`, `d''d'' = 0`, `d'd'' = -d''d'` and `int d'' phi = 0` on
/// `cases` random exact forms in dimensions 1 to 3.
pub fn calculus_suite(cases: usize, seed: u64) -> Result<CalculusReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b, mut c, mut d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let m = rng.gen_range(1..=3);
        let p = rng.gen_range(0..=m);
        let q = rng.gen_range(0..=m);
        let w = random_form(m, p, q, &mut rng, |r| random_rational_poly(m, 4, r));
        a = a.max(w.dprime().dprime().sup_norm());
        b = b.max(w.dsecond().dsecond().sup_norm());
        c = c.max(w.dsecond().dprime().add(&w.dprime().dsecond())?.sup_norm());
        // (m, m-1)-form vanishing to second order on the unit box boundary
        let bump = (0..m).fold(Poly::constant(m, Rational64::from_integer(1)), |acc, k| {
            let x = Poly::var(m, k);
            let one_minus = Poly::constant(m, Rational64::from_integer(1)).try_add(&x.negate());
            acc.try_mul(&x.try_mul(&x)).try_mul(&one_minus.try_mul(&one_minus))
        });
        let phi = random_form(m, m, m - 1, &mut rng, |r| random_rational_poly(m, 2, r).try_mul(&bump));
        let region = vec![(0.0, 1.0); m];
        d = d.max(phi.dsecond().tropical_integral(VolumeConvention::default(), &region)?.abs());
    }
    Ok(CalculusReport {
        cases,
        seed,
        tol: IDENTITY_TOL,
        max_dprime_dprime: a,
        max_dsecond_dsecond: b,
        max_anticommutator: c,
        max_boundary_integral: d,
        pass: a.max(b).max(c).max(d) <= IDENTITY_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub forms: usize,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    /// Largest residual per identity, in `THETA_TAGS` order.
    pub max_residual: Vec<(String, f64)>,
    pub pass: bool,
}

/// Random torus point with `0.5 <= |z_j| <= 2`.
pub fn random_torus_point(m: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..m).map(|_| Complex64::from_polar(rng.gen_range(0.5..=2.0), rng.gen_range(0.0..TAU))).collect()
}

/// The five Theta identities on `forms` random degree-3 forms in two
/// variables, each at `points` random torus points.
pub fn theta_suite(forms: usize, points: usize, seed: u64) -> Result<ThetaReport> {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 5];
    for _ in 0..forms {
        let (p, q) = (rng.gen_range(0..=m), rng.gen_range(0..=m));
        let w = random_form(m, p, q, &mut rng, |r| random_real_poly(m, 3, r));
        let (p2, q2) = (rng.gen_range(0..=m - p), rng.gen_range(0..=m - q));
        let other = random_form(m, p2, q2, &mut rng, |r| random_real_poly(m, 3, r));
        // the integral identity needs a top-degree form
        let top = random_form(m, m, m, &mut rng, |r| random_real_poly(m, 3, r));
        for _ in 0..points {
            let z = random_torus_point(m, &mut rng);
            for (t, tag) in THETA_TAGS.iter().enumerate() {
                let which = ThetaIdentity::from_tag(tag, Some(other.clone()))?;
                let form = if *tag == "integral" { &top } else { &w };
                worst[t] = worst[t].max(theta_residual(form, &z, &which)?);
            }
        }
    }
    Ok(ThetaReport {
        forms,
        points,
        seed,
        tol: THETA_TOL,
        max_residual: THETA_TAGS.iter().zip(worst).map(|(t, v)| (t.to_string(), v)).collect(),
        pass: worst.iter().all(|v| *v <= THETA_TOL),
    })
}

/// Sign of the permutation sorting `seq`, by counting inversions; zero
/// on a repeated index.
fn inversion_sign(seq: &[usize]) -> i32 {
    let mut inv = 0;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] == seq[b] {
                return 0;
            }
            inv += (seq[a] > seq[b]) as usize;
        }
    }
    if inv % 2 == 0 { 1 } else { -1 }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignRuleReport {
    pub m: usize,
    pub wedge_cases: usize,
    pub wedge_failures: usize,
    pub involution_cases: usize,
    pub involution_failures: usize,
    pub pass: bool,
}

/// Every product of basis superforms `dx_J (x) dx_K` on R^m against the
/// sign `(-1)^{|K||J'|} sgn(J J') sgn(K K')`, and the involution of every
/// basis form against `(-1)^{pq} dx_K (x) dx_J`.
pub fn sign_rule_suite(m: usize) -> Result<SignRuleReport> {
    let one = || Poly::constant(m, Rational64::from_integer(1));
    let basis = |j: u32, k: u32| SuperForm::term(m, &indices(j), &indices(k), one());
    let all: Vec<u32> = (0u32..1 << m).collect();
    let (mut wc, mut wf, mut ic, mut inf) = (0, 0, 0, 0);
    for &j in &all {
        for &k in &all {
            let a = basis(j, k)?;
            for &j2 in &all {
                for &k2 in &all {
                    let b = basis(j2, k2)?;
                    let got = a.wedge(&b)?;
                    let sj = inversion_sign(&[indices(j), indices(j2)].concat());
                    let sk = inversion_sign(&[indices(k), indices(k2)].concat());
                    let outer = if (k.count_ones() * j2.count_ones()) % 2 == 0 { 1 } else { -1 };
                    let sign = outer * sj * sk;
                    let ok = if sign == 0 {
                        got.is_zero()
                    } else {
                        let want = basis(j | j2, k | k2)?;
                        let want = if sign < 0 { want.neg() } else { want };
                        got == want
                    };
                    wc += 1;
                    wf += (!ok) as usize;
                }
            }
            let (p, q) = (j.count_ones(), k.count_ones());
            let want = basis(k, j)?;
            let want = if (p * q) % 2 == 0 { want } else { want.neg() };
            let ii = a.involution();
            ic += 1;
            inf += (ii != want || ii.involution() != a) as usize;
        }
    }
    Ok(SignRuleReport {
        m,
        wedge_cases: wc,
        wedge_failures: wf,
        involution_cases: ic,
        involution_failures: inf,
        pass: wf == 0 && inf == 0,
    })
}

/// `index_set` of the listed indices, for callers building forms by hand.
pub fn set(ix: &[usize]) -> u32 {
    index_set(ix)
}
