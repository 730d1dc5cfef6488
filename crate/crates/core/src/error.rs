use thiserror::Error;

/// Errors raised by the amoebalab core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-integer exponent `{0}`")]
    NonIntegerExponent(String),
    #[error("polynomial is empty after combining like terms")]
    EmptyPolynomial,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {0} is zero; point is not in the torus")]
    ZeroCoordinate(usize),
    #[error("polynomial vanishes identically on the fiber")]
    DegenerateFiber,
    #[error("coefficient grids do not match")]
    GridMismatch,
    #[error("expected bidegree ({m},{m}), got ({p},{q})")]
    Bidegree { p: usize, q: usize, m: usize },
    #[error("unknown identity tag `{0}`")]
    UnknownTag(String),
    #[error("current is not closed: path residual {residual:.3e} exceeds {tol:.3e}")]
    NotClosed { residual: f64, tol: f64 },
    #[error("current is not symmetric: asymmetry {asymmetry:.3e}")]
    NotSymmetric { asymmetry: f64 },
    #[error("recovered potential is not convex: second difference {defect:.3e} below -{tol:.3e}")]
    NotConvex { defect: f64, tol: f64 },
    #[error("point is not a vertex of the polytope")]
    NotAVertex,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid marked sphere: {0}")]
    InvalidSphere(String),
    #[error("point lies within {0:e} of a marked point")]
    NearMarkedPoint(f64),
    #[error("torus fiber passes within {0:e} of a zero of the polynomial")]
    NearZero(f64),
    #[error("quadrature did not converge (last change {0:.3e})")]
    NotConverged(f64),
    #[error("component {id} too small to fit ({cells} cells)")]
    ComponentTooSmall { id: u32, cells: usize },
    #[error("component {id} under-resolved: rounding distance {distance:.3e}")]
    UnderResolved { id: u32, distance: f64 },
    #[error("order map is not injective: components {a} and {b} share an order")]
    NotInjective { a: u32, b: u32 },
    #[error("order {order:?} lies outside the Newton polytope")]
    OutsidePolytope { order: Vec<f64> },
    #[error("gradient samples escape the polytope by {0:.3e}")]
    GradientEscape(f64),
    #[error("amoeba sample does not meet the box")]
    EmptyAmoeba,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
