//! Multivariate real polynomials with exact differentiation and box
//! integration, used as the coefficient fields of exact-mode superforms.

use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial in `nvars` real variables with coefficients in `T`.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Scalar> Poly<T> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    /// The coordinate function `x_k` (0-based).
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self::monomial(nvars, e, T::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: T) -> Self {
        assert_eq!(exps.len(), nvars, "exponent length must equal variable count");
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, T)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: T) {
        assert_eq!(e.len(), self.nvars);
        let sum = match self.terms.remove(&e) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())))
    }

    /// Partial derivative with respect to `x_k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[k] -= 1;
            out.add_term(d, c.clone() * T::from_i64_lossy(e[k] as i64));
        }
        out
    }

    /// Exact evaluation in the coefficient ring.
    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars);
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &p) in x.iter().zip(e) {
                for _ in 0..p {
                    t = t * xi.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_f64_lossy() * x.iter().zip(e).map(|(xi, &p)| xi.powi(p as i32)).product::<f64>()
            })
            .sum()
    }

    /// Exact integral over the axis-aligned box `region`.
    pub fn integrate_box(&self, region: &[(T, T)]) -> T {
        assert_eq!(region.len(), self.nvars);
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for ((lo, hi), &p) in region.iter().zip(e) {
                let n = p as usize + 1;
                let pow = |v: &T| (0..n).fold(T::one(), |a, _| a * v.clone());
                t = t * (pow(hi) - pow(lo)) / T::from_i64_lossy(n as i64);
            }
            acc = acc + t;
        }
        acc
    }

    pub fn try_add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn try_mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn negate(&self) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    /// Same polynomial with `f64` coefficients.
    pub fn to_f64(&self) -> Poly<f64> {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.to_f64_lossy())).collect() }
    }

    /// Largest coefficient magnitude, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }
}

impl<T: Scalar> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: Self) -> Poly<T> {
        self.try_add(rhs)
    }
}

impl<T: Scalar> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: Self) -> Poly<T> {
        self.try_add(&rhs.negate())
    }
}

impl<T: Scalar> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Self) -> Poly<T> {
        self.try_mul(rhs)
    }
}

impl<T: Scalar> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        self.negate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn cancellation_drops_terms() {
        let x = Poly::<f64>::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
    }

    #[test]
    fn product_rule_exact() {
        let x = Poly::<Rational64>::var(2, 0);
        let y = Poly::<Rational64>::var(2, 1);
        let p = &(&x * &x) * &y;
        let dp = p.partial(0);
        assert_eq!(dp, (&x * &y).scale(&Rational64::from_integer(2)));
        assert!(p.partial(0).partial(0).partial(0).is_zero());
    }

    #[test]
    fn box_integral_of_x1() {
        let x = Poly::<Rational64>::var(2, 0);
        let r = Rational64::from_integer;
        let v = x.integrate_box(&[(r(0), r(1)), (r(0), r(1))]);
        assert_eq!(v, Rational64::new(1, 2));
    }
}
