//! Laurent polynomials over the complex numbers.

mod parse;
pub mod roots;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, interval_hull, Polytope};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub use roots::{aberth, AberthRoots};

pub(crate) type Terms = BTreeMap<Vec<i32>, Complex64>;

/// Tolerance and sweep cap for the fiber root solver.
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 200;
/// Roots closer than this to the origin are treated as lying off the torus.
pub const ZERO_ROOT: f64 = 1e-13;

/// See [`LaurentPolynomial::fiber_factorization`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiberFactorization {
    pub lead: Complex64,
    pub low: i32,
    pub roots: Vec<Complex64>,
}

/// Finite sum `sum_a C_a z^a` over exponents `a` in Z^m; no stored
/// coefficient is zero and the sum is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPolynomial {
    m: usize,
    terms: Terms,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct LaurentJson {
    m: usize,
    terms: Vec<TermJson>,
}

impl LaurentPolynomial {
    /// Builds from (exponent, coefficient) pairs, combining like terms.
    pub fn from_terms(m: usize, terms: impl IntoIterator<Item = (Vec<i32>, Complex64)>) -> Result<Self> {
        let mut map = Terms::new();
        for (e, c) in terms {
            if e.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: e.len() });
            }
            *map.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        if map.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        Ok(LaurentPolynomial { m, terms: map })
    }

    /// Parses text such as `"1 + z1 - (2+i)*z1^-1*z2^3"`.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        parse::parse(text, m)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[i32]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: z.len() });
        }
        if let Some(j) = z.iter().position(|v| v.norm() == 0.0) {
            return Err(Error::ZeroCoordinate(j));
        }
        Ok(self.terms.iter().map(|(e, c)| c * monomial(z, e)).sum())
    }

    /// `sum |C_a z^a|`, the natural scale for residuals at `z`.
    pub fn abs_sum(&self, z: &[Complex64]) -> f64 {
        self.terms.iter().map(|(e, c)| (c * monomial(z, e)).norm()).sum()
    }

    /// Convex hull of the support.
    pub fn support_polytope(&self) -> Result<Polytope> {
        match self.m {
            1 => interval_hull(&self.terms.keys().map(|e| e[0] as f64).collect::<Vec<_>>()),
            2 => convex_hull(&self.terms.keys().map(|e| [e[0] as f64, e[1] as f64]).collect::<Vec<_>>()),
            m => Err(Error::Unsupported(format!("support polytope for m = {m}"))),
        }
    }

    /// Same polynomial with the two variables exchanged (m = 2).
    pub fn swap_vars(&self) -> Self {
        assert_eq!(self.m, 2);
        LaurentPolynomial { m: 2, terms: self.terms.iter().map(|(e, c)| (vec![e[1], e[0]], *c)).collect() }
    }

    /// `z`-coefficients of `F(z1, z)` for fixed `z1`, lowest power first,
    /// with the lowest exponent returned separately.
    fn fiber_coefficients(&self, z1: Complex64) -> (i32, Vec<Complex64>, Vec<f64>) {
        let lo = self.terms.keys().map(|e| e[1]).min().unwrap();
        let hi = self.terms.keys().map(|e| e[1]).max().unwrap();
        let n = (hi - lo) as usize + 1;
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        let mut scale = vec![0.0; n];
        for (e, c) in &self.terms {
            let t = c * z1.powi(e[0]);
            b[(e[1] - lo) as usize] += t;
            scale[(e[1] - lo) as usize] += t.norm();
        }
        (lo, b, scale)
    }

    /// `F(e^{x1 + i th1}, z2) = lead * z2^low * prod (z2 - r)` over all
    /// computed roots `r` (none filtered).
    pub fn fiber_factorization(&self, x1: f64, th1: f64) -> Result<FiberFactorization> {
        if self.m != 2 {
            return Err(Error::Unsupported("fiber roots need m = 2".into()));
        }
        let z1 = Complex64::from_polar(x1.exp(), th1);
        let (lo, mut b, scale) = self.fiber_coefficients(z1);
        // cancellation to round-off counts as an exact zero
        for (bk, s) in b.iter_mut().zip(&scale) {
            if bk.norm() <= 1e-14 * s {
                *bk = Complex64::new(0.0, 0.0);
            }
        }
        while b.last().is_some_and(|c| c.norm() == 0.0) {
            b.pop();
        }
        if b.is_empty() {
            return Err(Error::DegenerateFiber);
        }
        // factors of z2 correspond to roots at the origin
        let zeros = b.iter().take_while(|c| c.norm() == 0.0).count();
        let poly = &b[zeros..];
        let out = aberth(poly, ROOT_TOL, ROOT_MAX_ITER);
        Ok(FiberFactorization { lead: *b.last().unwrap(), low: lo + zeros as i32, roots: out.roots })
    }

    /// Roots `z2` in C* of `F(e^{x1 + i th1}, z2)`, with multiplicity.
    pub fn fiber_roots(&self, x1: f64, th1: f64) -> Result<Vec<Complex64>> {
        let f = self.fiber_factorization(x1, th1)?;
        Ok(f.roots.into_iter().filter(|r| r.norm() >= ZERO_ROOT).collect())
    }

    pub fn to_json(&self) -> String {
        let j = LaurentJson {
            m: self.m,
            terms: self.terms.iter().map(|(e, c)| TermJson { exp: e.clone(), re: c.re, im: c.im }).collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: LaurentJson = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_terms(j.m, j.terms.into_iter().map(|t| (t.exp, Complex64::new(t.re, t.im))))
    }
}

fn monomial(z: &[Complex64], e: &[i32]) -> Complex64 {
    z.iter().zip(e).map(|(zi, &k)| zi.powi(k)).product()
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 && c.re >= 0.0 {
                write!(f, "{}", c.re)?;
            } else if c.im == 0.0 {
                write!(f, "({})", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for (j, &k) in e.iter().enumerate() {
                if k != 0 {
                    write!(f, "*z{}^{}", j + 1, if k < 0 { format!("({k})") } else { k.to_string() })?;
                }
            }
        }
        Ok(())
    }
}
