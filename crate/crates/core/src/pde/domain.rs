use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::pde::field::GridField;
use crate::pde::solver::{half_line_truncation, solve_robin_heat_1d, solve_robin_heat_radial};
use crate::stochastics::{DriftField, Potential};

/// The 1D coordinate a solve on `domain` is expressed in: `x₁` for the
/// half-line and interval, `|x|` for balls and annuli.
pub fn grid_coordinate(domain: &DomainModel, x: &Point) -> f64 {
    match domain {
        DomainModel::HalfLine | DomainModel::Interval { .. } => x[0],
        DomainModel::Ball { .. } | DomainModel::Annulus { .. } => x.norm(),
    }
}

/// Point on the first axis with the given grid coordinate.
pub fn point_from_coordinate(s: f64) -> Point {
    Point::new(s, 0.0, 0.0)
}

fn axial_slope_bound(drift: &DriftField, a: f64, b: f64) -> f64 {
    // V' is affine along the axis for every supported potential.
    let dv = |s: f64| drift.grad(&point_from_coordinate(s))[0].abs();
    dv(a).max(dv(b))
}

/// Solves the Robin heat equation on any model domain whose data reduce to
/// one coordinate (`V` and `f0` radial on balls and annuli). `q` holds one
/// coefficient per boundary component; `x_max` is only used on the
/// half-line, where it is the largest coordinate that will be evaluated.
pub fn solve_on_domain(
    domain: &DomainModel,
    drift: &DriftField,
    q: &[f64],
    f0: &dyn Fn(f64) -> f64,
    t: f64,
    n_nodes: usize,
    x_max: f64,
) -> Result<GridField> {
    domain.validate()?;
    if q.len() != domain.boundary_components() {
        return Err(Error::invalid(format!(
            "{} boundary component(s) but {} Robin coefficient(s)",
            domain.boundary_components(),
            q.len()
        )));
    }
    let v = |s: f64| drift.axial_value(s);
    match *domain {
        DomainModel::HalfLine => {
            let mut bound = axial_slope_bound(drift, 0.0, x_max);
            if matches!(drift.potential(), Potential::Quadratic { .. }) {
                let l0 = half_line_truncation(x_max, t, bound);
                bound = axial_slope_bound(drift, 0.0, l0);
            }
            let length = half_line_truncation(x_max, t, bound);
            solve_robin_heat_1d(&v, (q[0], 0.0), f0, length, n_nodes, t, 0)
        }
        DomainModel::Interval { length } => solve_robin_heat_1d(&v, (q[0], q[1]), f0, length, n_nodes, t, 0),
        _ => {
            if !drift.is_radial() {
                return Err(Error::Precondition("radial solve needs a radial potential".into()));
            }
            solve_robin_heat_radial(domain, &v, q, f0, n_nodes, t, 0)
        }
    }
}

/// Value of a solution at a point of the domain.
pub fn field_at_point(domain: &DomainModel, field: &GridField, x: &Point) -> Result<f64> {
    field.value_at(grid_coordinate(domain, x))
}
