//! Flat model domains, their boundary geometry, and the scalar comparison
//! functions built from the curvature constants.

mod comparison;
mod domain;
mod laplacian;

pub use comparison::{comparison_h, curvature_cap, r_admissible, ComparisonProfile, PROFILE_NODES};
pub use domain::{BoundaryFrame, CurvatureData, DomainModel, Point, BOUNDARY_TOL};
pub use laplacian::{laplacian_rho_check, LaplacianBounds, LaplacianCheck};
