use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DomainModel;
use crate::numerics::fit_slope;
use crate::pde::solve_on_domain;
use crate::semigroup::robin::RobinCoefficient;
use crate::stochastics::DriftField;

/// Largest accepted `|Nf + Qf|` at a boundary node.
pub const D0_TOLERANCE: f64 = 1e-8;

/// A function of the grid coordinate (position on the line, or radius)
/// with its first two derivatives.
pub struct TestFunction<'a> {
    pub value: &'a (dyn Fn(f64) -> f64 + Sync),
    pub first: &'a (dyn Fn(f64) -> f64 + Sync),
    pub second: &'a (dyn Fn(f64) -> f64 + Sync),
}

impl TestFunction<'_> {
    /// `Lf = f'' + ((d−1)/r + V') f'` in the grid coordinate.
    pub fn generator(&self, domain: &DomainModel, drift: &DriftField, s: f64) -> f64 {
        let dv = drift.grad(&crate::pde::point_from_coordinate(s))[0];
        let radial = match domain {
            DomainModel::Ball { dim, .. } => (*dim as f64 - 1.0) / s,
            DomainModel::Annulus { .. } => 1.0 / s,
            _ => 0.0,
        };
        let first = (self.first)(s);
        let drift_term = if first == 0.0 { 0.0 } else { (radial + dv) * first };
        (self.second)(s) + drift_term
    }

    /// Largest Robin defect `|Nf + Qf|` over the boundary points of the
    /// coordinate interval (the inward normal is `+` at the left end).
    pub fn boundary_defect(&self, domain: &DomainModel, q: &[f64]) -> Result<f64> {
        let ends: Vec<(f64, f64, f64)> = match *domain {
            DomainModel::HalfLine => vec![(0.0, 1.0, q[0])],
            DomainModel::Interval { length } => vec![(0.0, 1.0, q[0]), (length, -1.0, q[1])],
            DomainModel::Ball { radius, .. } => vec![(radius, -1.0, q[0])],
            DomainModel::Annulus { r_in, r_out } => vec![(r_in, 1.0, q[0]), (r_out, -1.0, q[1])],
        };
        let mut worst: f64 = 0.0;
        for (s, normal, qc) in ends {
            let d = normal * (self.first)(s) + qc * (self.value)(s);
            if !d.is_finite() {
                return Err(Error::NonFinite(format!("test function at boundary coordinate {s}")));
            }
            worst = worst.max(d.abs());
        }
        Ok(worst)
    }
}

/// `(P_t^Q f − f)/t − Lf` on a grid of coordinates for a ladder of times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorResidual {
    pub coordinates: Vec<f64>,
    pub times: Vec<f64>,
    /// `residuals[i][j]` at time `times[i]` and coordinate `coordinates[j]`.
    pub residuals: Vec<Vec<f64>>,
    /// Sup over the grid, per time.
    pub sup: Vec<f64>,
    /// Least-squares slope of `log sup` against `log t`.
    pub slope: f64,
    pub boundary_defect: f64,
}

/// Generator identification for a member of the Robin domain, with
/// `P_t^Q f` from the PDE reference on `pde_nodes` nodes.
pub fn generator_residual(
    domain: &DomainModel,
    drift: &DriftField,
    f: &TestFunction<'_>,
    q: &RobinCoefficient,
    coordinates: &[f64],
    times: &[f64],
    pde_nodes: usize,
) -> Result<GeneratorResidual> {
    q.validate(domain)?;
    let qs = q
        .as_components()
        .ok_or_else(|| Error::Precondition("the PDE reference needs per-component constant Q".into()))?;
    if coordinates.is_empty() || times.is_empty() {
        return Err(Error::invalid("empty coordinate grid or time ladder"));
    }
    let defect = f.boundary_defect(domain, qs)?;
    if defect > D0_TOLERANCE {
        return Err(Error::Precondition(format!(
            "test function violates the Robin condition: |Nf + Qf| = {defect:.3e} > {D0_TOLERANCE:e}"
        )));
    }
    let x_max = coordinates.iter().cloned().fold(0.0, f64::max);
    let mut residuals = Vec::with_capacity(times.len());
    for &t in times {
        let field = solve_on_domain(domain, drift, qs, f.value, t, pde_nodes, x_max)?;
        let row: Vec<f64> = coordinates
            .iter()
            .map(|&s| Ok(((field.value_at(s)? - (f.value)(s)) / t - f.generator(domain, drift, s)).abs()))
            .collect::<Result<_>>()?;
        residuals.push(row);
    }
    let sup: Vec<f64> = residuals.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let slope = if times.len() >= 2 {
        let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let ls: Vec<f64> = sup.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect();
        fit_slope(&lt, &ls)
    } else {
        f64::NAN
    };
    Ok(GeneratorResidual { coordinates: coordinates.to_vec(), times: times.to_vec(), residuals, sup, slope, boundary_defect: defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_have_zero_residual() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let f = TestFunction { value: &|_| 1.0, first: &|_| 0.0, second: &|_| 0.0 };
        let r = generator_residual(&dom, &z, &f, &RobinCoefficient::zero(&dom), &[0.1, 0.5], &[0.01], 65).unwrap();
        assert!(r.sup[0] < 1e-10);
    }

    #[test]
    fn robin_violation_is_a_precondition_error() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let f = TestFunction { value: &|x| x, first: &|_| 1.0, second: &|_| 0.0 };
        let err = generator_residual(&dom, &z, &f, &RobinCoefficient::zero(&dom), &[0.5], &[0.01], 65).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn neumann_cosine_residual_is_first_order() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let pi = std::f64::consts::PI;
        let f = TestFunction {
            value: &move |x: f64| (pi * x).cos(),
            first: &move |x: f64| -pi * (pi * x).sin(),
            second: &move |x: f64| -pi * pi * (pi * x).cos(),
        };
        let r = generator_residual(&dom, &z, &f, &RobinCoefficient::zero(&dom), &[0.0, 0.25, 0.5, 1.0], &[0.04, 0.02, 0.01], 401)
            .unwrap();
        assert!((r.slope - 1.0).abs() < 0.1, "{r:?}");
    }
}
