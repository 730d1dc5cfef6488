//! Aberth–Ehrlich simultaneous root iteration.

use crate::scalar::Real;
use num_complex::Complex;

/// Outcome of [`aberth`].
#[derive(Debug, Clone)]
pub struct AberthRoots<T> {
    pub roots: Vec<Complex<T>>,
    pub iterations: usize,
    pub converged: bool,
}

fn horner<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    // value and derivative together
    let n = coeffs.len();
    let mut p = coeffs[n - 1];
    let mut dp = Complex::new(T::zero(), T::zero());
    for c in coeffs[..n - 1].iter().rev() {
        dp = dp * z + p;
        p = p * z + *c;
    }
    (p, dp)
}

/// All roots of `coeffs[0] + coeffs[1] z + ... + coeffs[n] z^n`.
///
/// The leading coefficient must be nonzero. Iteration stops once every
/// correction is below `tol * (1 + |z|)` or after `max_iter` sweeps.
pub fn aberth<T: Real>(coeffs: &[Complex<T>], tol: T, max_iter: usize) -> AberthRoots<T> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return AberthRoots { roots: vec![], iterations: 0, converged: true };
    }
    let lead = coeffs[degree];
    if degree == 1 {
        return AberthRoots { roots: vec![-coeffs[0] / lead], iterations: 0, converged: true };
    }

    // Start on a circle whose radius is the geometric mean root modulus,
    // rotated off the real axis to avoid symmetric stalls.
    let a0 = coeffs[0].norm();
    let an = lead.norm();
    let mut radius = if a0 > T::zero() {
        (a0 / an).powf(T::one() / T::from_usize(degree).unwrap())
    } else {
        T::one()
    };
    if !radius.is_finite() || radius <= T::zero() {
        radius = T::one();
    }
    let two_pi = T::lit(std::f64::consts::TAU);
    let mut z: Vec<Complex<T>> = (0..degree)
        .map(|k| {
            let ang = two_pi * T::from_usize(k).unwrap() / T::from_usize(degree).unwrap() + T::lit(0.4);
            Complex::from_polar(radius, ang)
        })
        .collect();

    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let mut max_step = T::zero();
        for k in 0..degree {
            let (p, dp) = horner(coeffs, z[k]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex::new(T::zero(), T::zero());
            for j in 0..degree {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > T::zero() {
                        s = s + Complex::new(T::one(), T::zero()) / d;
                    }
                }
            }
            let denom = Complex::new(T::one(), T::zero()) - ratio * s;
            let fin = |c: Complex<T>| c.re.is_finite() && c.im.is_finite();
            let step = if denom.norm() > T::zero() && fin(ratio) { ratio / denom } else { ratio };
            if !fin(step) {
                continue;
            }
            z[k] = z[k] - step;
            let rel = step.norm() / (T::one() + z[k].norm());
            if rel > max_step {
                max_step = rel;
            }
        }
        if max_step <= tol {
            converged = true;
            break;
        }
    }
    AberthRoots { roots: z, iterations, converged }
}
