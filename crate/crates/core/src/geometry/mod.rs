//! Convex hulls, cones, Hausdorff distances and raster component analysis.

pub mod components;
pub mod cone;
pub mod fit;
pub mod grid;
pub mod hausdorff;
pub mod hull;
pub mod ppm;
pub mod recession;

pub use components::{dilate8, distance_transform, flood_components, ComponentMap};
pub use cone::{angular_mismatch_deg, normal_cone, Cone, ConeShape, Fan};
pub use fit::{fit_affine, AffineFit};
pub use grid::Grid;
pub use hausdorff::{hausdorff_distance, hausdorff_distance_2d};
pub use hull::{convex_hull, interval_hull, Facet, Polytope};
pub use ppm::component_ppm;
pub use recession::{check_recession, RecessionEntry, RecessionReport, RecessionStatus};
