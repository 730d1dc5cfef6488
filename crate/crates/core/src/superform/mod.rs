//! Tropical superforms on R^m: sums `f dx_J (x) dx_K` with the two
//! differentials, wedge product, involution and integration.
//!
//! Index sets are bitmasks (bit `k` is `dx_{k+1}`), so they are ordered by
//! construction.

mod current;
mod field;
mod potential;
pub mod suite;
pub mod theta;

pub use current::SuperCurrent11;
pub use field::GridField;
pub use potential::{potential_from_current, potential_from_current_with, PotentialOptions, PotentialReport};
pub use theta::{theta_residual, ComplexForm, ThetaIdentity};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt::Debug;

/// Coefficient ring of a superform.
pub trait CoefficientField: Clone + Debug + Send + Sync {
    fn nvars(&self) -> usize;
    fn is_zero(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn partial(&self, k: usize) -> Self;
    /// Integral over the box `region` (one `(lo, hi)` per axis).
    fn integrate(&self, region: &[(f64, f64)]) -> f64;
    /// Largest absolute coefficient or sample.
    fn sup_norm(&self) -> f64;
}

impl<T: Scalar> CoefficientField for Poly<T> {
    fn nvars(&self) -> usize {
        Poly::nvars(self)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn neg(&self) -> Self {
        self.negate()
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self.try_add(other))
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self.try_mul(other))
    }
    fn partial(&self, k: usize) -> Self {
        Poly::partial(self, k)
    }
    fn integrate(&self, region: &[(f64, f64)]) -> f64 {
        let r: Vec<(T, T)> = region
            .iter()
            .map(|(a, b)| (T::from_f64(*a).expect("representable bound"), T::from_f64(*b).expect("representable bound")))
            .collect();
        self.integrate_box(&r).to_f64_lossy()
    }
    fn sup_norm(&self) -> f64 {
        self.max_abs_coeff()
    }
}

pub type IndexSet = u32;

pub fn index_set(indices: &[usize]) -> IndexSet {
    indices.iter().fold(0, |m, &k| m | (1 << k))
}

pub fn indices(set: IndexSet) -> Vec<usize> {
    (0..32).filter(|k| set & (1 << k) != 0).collect()
}

fn card(set: IndexSet) -> usize {
    set.count_ones() as usize
}

/// Sign of `dx_A ^ dx_B` relative to `dx_{A u B}`, or `None` when the
/// sets overlap.
pub fn merge_sign(a: IndexSet, b: IndexSet) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    // each element of b passes every larger element of a
    let mut swaps = 0;
    for k in indices(b) {
        swaps += card(a & !((1u32 << (k + 1)) - 1));
    }
    Some(if swaps % 2 == 0 { 1 } else { -1 })
}

/// `(p, q)`-superform on R^m.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperForm<C> {
    m: usize,
    p: usize,
    q: usize,
    coeffs: BTreeMap<(IndexSet, IndexSet), C>,
}

/// Volume form `mu = c dx` used by the tropical integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeConvention {
    pub c: f64,
}

impl Default for VolumeConvention {
    fn default() -> Self {
        VolumeConvention { c: 1.0 }
    }
}

impl VolumeConvention {
    /// `(-1)^{m(m-1)/2}`.
    pub fn sign(m: usize) -> f64 {
        if (m * (m.saturating_sub(1)) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn sgn<C: CoefficientField>(s: i32, f: C) -> C {
    if s < 0 {
        f.neg()
    } else {
        f
    }
}

impl<C: CoefficientField> SuperForm<C> {
    pub fn zero(m: usize, p: usize, q: usize) -> Self {
        assert!(p <= m && q <= m && m <= 32);
        SuperForm { m, p, q, coeffs: BTreeMap::new() }
    }

    /// Single term `f dx_J (x) dx_K` with 0-based index lists.
    pub fn term(m: usize, j: &[usize], k: &[usize], f: C) -> Result<Self> {
        let (js, ks) = (index_set(j), index_set(k));
        if card(js) != j.len() || card(ks) != k.len() || j.iter().chain(k).any(|&i| i >= m) {
            return Err(Error::InvalidArgument("index lists must be distinct and below m".into()));
        }
        if f.nvars() != m {
            return Err(Error::DimensionMismatch { expected: m, got: f.nvars() });
        }
        // listed order may differ from increasing order
        let sj = perm_sign(j);
        let sk = perm_sign(k);
        let mut out = Self::zero(m, j.len(), k.len());
        out.insert_add(js, ks, sgn(sj * sk, f))?;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&(IndexSet, IndexSet), &C)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, j: IndexSet, k: IndexSet) -> Option<&C> {
        self.coeffs.get(&(j, k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn insert_add(&mut self, j: IndexSet, k: IndexSet, f: C) -> Result<()> {
        let v = match self.coeffs.remove(&(j, k)) {
            Some(old) => old.add(&f)?,
            None => f,
        };
        if !v.is_zero() {
            self.coeffs.insert((j, k), v);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.m, self.p, self.q) != (other.m, other.p, other.q) {
            return Err(Error::InvalidArgument("sum of forms of different type".into()));
        }
        let mut out = self.clone();
        for ((j, k), f) in &other.coeffs {
            out.insert_add(*j, *k, f.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        SuperForm { m: self.m, p: self.p, q: self.q, coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `d' w = sum_k df/dx_k dx_k ^ dx_J (x) dx_K`.
    pub fn dprime(&self) -> Self {
        let mut out = Self::zero(self.m, (self.p + 1).min(self.m), self.q);
        if self.p == self.m {
            return out;
        }
        for ((j, k), f) in &self.coeffs {
            for l in 0..self.m {
                if let Some(s) = merge_sign(1 << l, *j) {
                    let d = f.partial(l);
                    if !d.is_zero() {
                        out.insert_add(j | (1 << l), *k, sgn(s, d)).expect("same mode");
                    }
                }
            }
        }
        out
    }

    /// `d'' w = (-1)^p sum_k df/dx_k dx_J (x) dx_k ^ dx_K`.
    pub fn dsecond(&self) -> Self {
        let mut out = Self::zero(self.m, self.p, (self.q + 1).min(self.m));
        if self.q == self.m {
            return out;
        }
        let lead = if self.p % 2 == 0 { 1 } else { -1 };
        for ((j, k), f) in &self.coeffs {
            for l in 0..self.m {
                if let Some(s) = merge_sign(1 << l, *k) {
                    let d = f.partial(l);
                    if !d.is_zero() {
                        out.insert_add(*j, k | (1 << l), sgn(lead * s, d)).expect("same mode");
                    }
                }
            }
        }
        out
    }

    /// `(dx_J (x) dx_K) ^ (dx_J' (x) dx_K') = (-1)^{q p'} dx_J ^ dx_J' (x) dx_K ^ dx_K'`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: other.m });
        }
        let (p, q) = (self.p + other.p, self.q + other.q);
        if p > self.m || q > self.m {
            return Ok(Self::zero(self.m, p.min(self.m), q.min(self.m)));
        }
        let mut out = Self::zero(self.m, p, q);
        let base = if (self.q * other.p) % 2 == 0 { 1 } else { -1 };
        for ((j, k), f) in &self.coeffs {
            for ((j2, k2), g) in &other.coeffs {
                let (Some(s1), Some(s2)) = (merge_sign(*j, *j2), merge_sign(*k, *k2)) else {
                    continue;
                };
                let h = f.mul(g)?;
                out.insert_add(j | j2, k | k2, sgn(base * s1 * s2, h))?;
            }
        }
        Ok(out)
    }

    /// `I(f dx_J (x) dx_K) = (-1)^{pq} f dx_K (x) dx_J`.
    pub fn involution(&self) -> Self {
        let s = if (self.p * self.q) % 2 == 0 { 1 } else { -1 };
        SuperForm {
            m: self.m,
            p: self.q,
            q: self.p,
            coeffs: self.coeffs.iter().map(|((j, k), f)| ((*k, *j), sgn(s, f.clone()))).collect(),
        }
    }

    /// `int f mu (x) mu := (-1)^{m(m-1)/2} int f mu` over a box. The stored
    /// coefficient `g` of `dx (x) dx` equals `f c^2`, so the value is
    /// `(-1)^{m(m-1)/2} int g / c dx`.
    pub fn tropical_integral(&self, conv: VolumeConvention, region: &[(f64, f64)]) -> Result<f64> {
        if self.p != self.m || self.q != self.m {
            return Err(Error::Bidegree { p: self.p, q: self.q, m: self.m });
        }
        if region.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: region.len() });
        }
        let full = (1u32 << self.m) - 1;
        let v = self.coeffs.get(&(full, full)).map_or(0.0, |g| g.integrate(region));
        Ok(VolumeConvention::sign(self.m) * v / conv.c)
    }

    /// Largest coefficient sup-norm, zero for the zero form.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.values().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }
}

fn perm_sign(list: &[usize]) -> i32 {
    let mut inv = 0;
    for a in 0..list.len() {
        for b in a + 1..list.len() {
            if list[a] > list[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

impl<T: Scalar> SuperForm<Poly<T>> {
    /// `d'd'' f` of a polynomial function, i.e. its Hessian as a (1,1)-form.
    pub fn hessian_form(f: &Poly<T>) -> Self {
        let m = f.nvars();
        let zero = SuperForm::term(m, &[], &[], f.clone()).unwrap_or_else(|_| Self::zero(m, 0, 0));
        zero.dsecond().dprime()
    }
}
