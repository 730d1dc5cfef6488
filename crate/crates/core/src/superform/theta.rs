//! Correspondence between tropical superforms and complex forms on the
//! torus, checked pointwise.
//!
//! Complex forms live in the exterior algebra on `dz_1..dz_m,
//! dzbar_1..dzbar_m` (generator `j` is `dz_{j+1}`, generator `m + j` is
//! `dzbar_{j+1}`). Coefficients are kept symbolic as
//! `c * f(Log z) * z^a * zbar^b` so that the holomorphic and
//! antiholomorphic derivatives can be taken by the chain rule before
//! evaluation.

use super::{merge_sign, SuperForm};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

/// Constant-coefficient complex form: basis bitmask to coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplexForm {
    pub m: usize,
    pub coeffs: BTreeMap<u32, Complex64>,
}

/// Sign of sorting a list of distinct generators, or `None` on repeats.
fn sort_sign(gens: &[usize]) -> Option<(u32, i32)> {
    let mut mask = 0u32;
    let mut inv = 0;
    for (a, &g) in gens.iter().enumerate() {
        if mask & (1 << g) != 0 {
            return None;
        }
        mask |= 1 << g;
        inv += gens[..a].iter().filter(|&&h| h > g).count();
    }
    Some((mask, if inv % 2 == 0 { 1 } else { -1 }))
}

fn gens_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask & (1 << k) != 0).collect()
}

impl ComplexForm {
    fn add_term(&mut self, basis: u32, c: Complex64) {
        *self.coeffs.entry(basis).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexForm { m: self.m, coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * s)).collect() }
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = ComplexForm { m: self.m, ..Default::default() };
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                if let Some(s) = merge_sign(*a, *b) {
                    out.add_term(a | b, x * y * s as f64);
                }
            }
        }
        out
    }

    /// Complex conjugate: conjugates coefficients and swaps `dz_j` with
    /// `dzbar_j`, re-sorting the generators.
    pub fn conj(&self) -> Self {
        let m = self.m;
        let mut out = ComplexForm { m, ..Default::default() };
        for (basis, c) in &self.coeffs {
            let swapped: Vec<usize> = gens_of(*basis).into_iter().map(|g| if g < m { g + m } else { g - m }).collect();
            let (mask, s) = sort_sign(&swapped).expect("distinct generators");
            out.add_term(mask, c.conj() * s as f64);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<u32> = self.coeffs.keys().chain(other.coeffs.keys()).cloned().collect();
        let zero = Complex64::new(0.0, 0.0);
        keys.iter()
            .map(|k| (self.coeffs.get(k).unwrap_or(&zero) - other.coeffs.get(k).unwrap_or(&zero)).norm())
            .fold(0.0, f64::max)
    }

    /// Top coefficient after substituting `dz_j = z_j (dx_j + i dth_j)`
    /// and `dzbar_j = zbar_j (dx_j - i dth_j)`, on the real basis
    /// `dx_1 ^ dth_1 ^ ... ^ dx_m ^ dth_m`.
    pub fn top_real_coefficient(&self, z: &[Complex64]) -> Complex64 {
        let m = self.m;
        let top = (1u32 << (2 * m)) - 1;
        let mut acc = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        for (basis, c) in &self.coeffs {
            if *basis != top {
                continue;
            }
            let gens = gens_of(*basis);
            // real generator 2j is dx_j, 2j + 1 is dth_j
            for choice in 0u32..(1 << gens.len()) {
                let mut w = *c;
                let mut real = Vec::with_capacity(gens.len());
                for (t, &g) in gens.iter().enumerate() {
                    let (j, holo) = if g < m { (g, true) } else { (g - m, false) };
                    w *= if holo { z[j] } else { z[j].conj() };
                    if choice & (1 << t) == 0 {
                        real.push(2 * j);
                    } else {
                        real.push(2 * j + 1);
                        w *= if holo { i } else { -i };
                    }
                }
                if let Some((mask, s)) = sort_sign(&real) {
                    if mask == top {
                        acc += w * s as f64;
                    }
                }
            }
        }
        acc
    }
}

/// One term `c * f(Log z) * prod z_j^{a_j} * prod zbar_j^{b_j} * basis`.
#[derive(Debug, Clone)]
struct Term {
    c: Complex64,
    f: Poly<f64>,
    a: Vec<i32>,
    b: Vec<i32>,
    basis: u32,
}

/// Complex form with coefficients that are functions on the torus.
#[derive(Debug, Clone)]
struct FormField {
    m: usize,
    terms: Vec<Term>,
}

impl FormField {
    fn scale(mut self, s: Complex64) -> Self {
        for t in &mut self.terms {
            t.c *= s;
        }
        self
    }

    /// Holomorphic (`anti = false`) or antiholomorphic exterior derivative.
    fn derivative(&self, anti: bool) -> Self {
        let m = self.m;
        let mut terms = Vec::new();
        for t in &self.terms {
            for l in 0..m {
                let gen = if anti { m + l } else { l };
                let Some(s) = merge_sign(1 << gen, t.basis) else { continue };
                let basis = t.basis | (1 << gen);
                let pow = if anti { t.b[l] } else { t.a[l] };
                let lower = |mut v: Vec<i32>| {
                    v[l] -= 1;
                    v
                };
                let (a1, b1) = if anti { (t.a.clone(), lower(t.b.clone())) } else { (lower(t.a.clone()), t.b.clone()) };
                // d/dz_l f(log|z|) = f_l / (2 z_l), likewise for zbar_l
                let df = t.f.partial(l);
                if !df.is_zero() {
                    terms.push(Term { c: t.c * 0.5 * s as f64, f: df, a: a1.clone(), b: b1.clone(), basis });
                }
                if pow != 0 {
                    terms.push(Term { c: t.c * (pow * s) as f64, f: t.f.clone(), a: a1, b: b1, basis });
                }
            }
        }
        FormField { m, terms }
    }

    fn eval(&self, z: &[Complex64]) -> ComplexForm {
        let x: Vec<f64> = z.iter().map(|v| v.norm().ln()).collect();
        let mut out = ComplexForm { m: self.m, ..Default::default() };
        for t in &self.terms {
            let mut v = t.c * t.f.eval_f64(&x);
            for j in 0..self.m {
                v *= z[j].powi(t.a[j]) * z[j].conj().powi(t.b[j]);
            }
            out.add_term(t.basis, v);
        }
        out
    }
}

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `Theta(f dx_J (x) dx_K) = i^q / (2 sqrt(pi))^{p+q} f(Log z) dz_J/z_J ^ dzbar_K/zbar_K`.
fn theta<T: Scalar>(w: &SuperForm<Poly<T>>) -> FormField {
    let m = w.dim();
    let (p, q) = w.bidegree();
    let c = i_pow(q) / (2.0 * PI.sqrt()).powi((p + q) as i32);
    let terms = w
        .coefficients()
        .map(|((j, k), f)| {
            let mut a = vec![0; m];
            let mut b = vec![0; m];
            for l in 0..m {
                if j & (1 << l) != 0 {
                    a[l] = -1;
                }
                if k & (1 << l) != 0 {
                    b[l] = -1;
                }
            }
            Term { c, f: f.to_f64(), a, b, basis: j | (k << m) }
        })
        .collect();
    FormField { m, terms }
}

/// Evaluates `Theta(w)` at `z`.
pub fn theta_at<T: Scalar>(w: &SuperForm<Poly<T>>, z: &[Complex64]) -> ComplexForm {
    theta(w).eval(z)
}

/// Which property of `Theta` to check.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaIdentity<T> {
    /// `Theta(w ^ other) = Theta(w) ^ Theta(other)`.
    Homomorphism(SuperForm<Poly<T>>),
    /// `Theta(d'w) = pi^{-1/2} d Theta(w)`.
    DPrime,
    /// `Theta(d''w) = i pi^{-1/2} dbar Theta(w)`.
    DSecond,
    /// `Theta(I w) = i^{p+q} conj(Theta(w))`.
    Involution,
    /// Fiber integral of `Theta(w)` equals the tropical density of `w`.
    Integral,
}

impl<T: Scalar> ThetaIdentity<T> {
    /// Tags: `homomorphism` (needs `partner`), `dprime`, `dsecond`,
    /// `involution`, `integral`.
    pub fn from_tag(tag: &str, partner: Option<SuperForm<Poly<T>>>) -> Result<Self> {
        match tag {
            "homomorphism" => partner
                .map(ThetaIdentity::Homomorphism)
                .ok_or_else(|| Error::InvalidArgument("homomorphism check needs a second form".into())),
            "dprime" => Ok(ThetaIdentity::DPrime),
            "dsecond" => Ok(ThetaIdentity::DSecond),
            "involution" => Ok(ThetaIdentity::Involution),
            "integral" => Ok(ThetaIdentity::Integral),
            other => Err(Error::UnknownTag(other.to_string())),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ThetaIdentity::Homomorphism(_) => "homomorphism",
            ThetaIdentity::DPrime => "dprime",
            ThetaIdentity::DSecond => "dsecond",
            ThetaIdentity::Involution => "involution",
            ThetaIdentity::Integral => "integral",
        }
    }
}

/// Largest coefficient discrepancy between the two sides of `which` at `z`.
pub fn theta_residual<T: Scalar>(w: &SuperForm<Poly<T>>, z: &[Complex64], which: &ThetaIdentity<T>) -> Result<f64> {
    let m = w.dim();
    if z.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: z.len() });
    }
    if let Some(j) = z.iter().position(|v| v.norm() == 0.0) {
        return Err(Error::ZeroCoordinate(j));
    }
    let sqrt_pi = PI.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let res = match which {
        ThetaIdentity::DPrime => {
            let lhs = theta_at(&w.dprime(), z);
            let rhs = theta(w).derivative(false).scale(Complex64::new(1.0 / sqrt_pi, 0.0)).eval(z);
            lhs.max_abs_diff(&rhs)
        }
        ThetaIdentity::DSecond => {
            let lhs = theta_at(&w.dsecond(), z);
            let rhs = theta(w).derivative(true).scale(i / sqrt_pi).eval(z);
            lhs.max_abs_diff(&rhs)
        }
        ThetaIdentity::Involution => {
            let (p, q) = w.bidegree();
            let lhs = theta_at(&w.involution(), z);
            let rhs = theta_at(w, z).conj().scale(i_pow(p + q));
            lhs.max_abs_diff(&rhs)
        }
        ThetaIdentity::Homomorphism(other) => {
            let lhs = theta_at(&w.wedge(other)?, z);
            let rhs = theta_at(w, z).wedge(&theta_at(other, z));
            lhs.max_abs_diff(&rhs)
        }
        ThetaIdentity::Integral => {
            let top = theta_at(w, z).top_real_coefficient(z);
            let full = (1u32 << m) - 1;
            let x: Vec<f64> = z.iter().map(|v| v.norm().ln()).collect();
            let f = if w.bidegree() == (m, m) {
                w.coefficient(full, full).map_or(0.0, |g| g.to_f64().eval_f64(&x))
            } else {
                0.0
            };
            let sign = super::VolumeConvention::sign(m);
            (top * TAU.powi(m as i32) - sign * f).norm()
        }
    };
    Ok(res)
}
