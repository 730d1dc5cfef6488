//! Amoebas, Ronkin functions and tropical superforms.
//!
//! The classical pipeline works with Laurent polynomials in two variables;
//! the generalized pipeline with logarithmic differentials on the Riemann
//! sphere. Both produce Hessian currents, orders, Newton polytopes and
//! Monge-Ampère masses that can be compared against each other.

pub mod classical;
pub mod error;
pub mod generalized;
pub mod geometry;
pub mod laurent;
pub mod poly;
pub mod scalar;
pub mod superform;

pub use error::{Error, Result};
pub use laurent::LaurentPolynomial;
pub use poly::Poly;
pub use scalar::{Real, Scalar};

use num_rational::Rational64;

pub type RealPoly = Poly<f64>;
pub type RationalPoly = Poly<Rational64>;
/// Superform with exact rational polynomial coefficients.
pub type ExactSuperForm = superform::SuperForm<Poly<Rational64>>;
/// Superform with floating-point polynomial coefficients.
pub type PolySuperForm = superform::SuperForm<Poly<f64>>;
/// Superform with grid-sampled coefficients.
pub type SampledSuperForm = superform::SuperForm<superform::GridField>;
