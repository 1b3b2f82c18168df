//! Deterministic reference solver for `∂_t u = Δu + <∇V, ∇u>` with the
//! Robin condition `<N, ∇u> + Q u = 0`, on intervals, truncated half-lines
//! and radially symmetric balls and annuli.

mod domain;
mod field;
mod solver;

pub use domain::{field_at_point, grid_coordinate, point_from_coordinate, solve_on_domain};
pub use field::{field_gradient, stencil_derivatives, Geometry, GridField, SchemeMeta};
pub use solver::{
    auto_steps, half_line_truncation, richardson_difference, solve_robin_heat_1d, solve_robin_heat_halfline,
    solve_robin_heat_radial, MIN_NODES,
};
