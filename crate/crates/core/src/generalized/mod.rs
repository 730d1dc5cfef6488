//! Generalized amoebas of real-normalized logarithmic differentials on
//! the Riemann sphere.

pub mod compare;
pub mod fan_limit;
pub mod pushforward;
pub mod ronkin;
pub mod sampling;
pub mod sphere;

pub use sampling::{Sample, SamplingPlan, DEFAULT_DELTA};
pub use sphere::{
    build_marked_sphere, numeric_jacobian_rank, numeric_jacobian_singular_values, FanRay, FanReport, MarkedSphere,
    Nondegeneracy, RankReport,
};
pub use pushforward::{amoeba_points, hessian_density, hessian_pushforward, HessianMeasure};
pub use ronkin::{
    ma_total_mass_generalized, monte_carlo_options, newton_polytope_generalized, order_map_generalized,
    ronkin_generalized, verify_recession_theorem, GeneralizedMaReport, GeneralizedOrder, GeneralizedOrderMap,
    GeneralizedRonkin,
};
pub use fan_limit::{verify_fan_limit, FanLimitReport};
pub use compare::{compare_with_classical, ClassicalComparison, OrderMatch};
