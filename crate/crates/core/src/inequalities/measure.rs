use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DomainModel;
use crate::numerics::simpson_weights;
use crate::pde::{point_from_coordinate, stencil_derivatives, Geometry};
use crate::semigroup::TestFunction;
use crate::stochastics::DriftField;

/// A boundary node of the coordinate interval carrying mass of `μ_∂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryNode {
    pub index: usize,
    /// Boundary component, numbered as the domain numbers them.
    pub component: usize,
    /// `+1` when the inward normal points to larger coordinates.
    pub normal: f64,
    pub weight: f64,
}

/// `μ(dx) = e^{V(x)} dx` reduced to one coordinate (with the radial
/// Jacobian `r^{d-1}` on balls and annuli), discretized by Simpson's rule on
/// a uniform grid whose end nodes lie on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedMeasure1D {
    pub domain: DomainModel,
    pub geometry: Geometry,
    pub nodes: Vec<f64>,
    pub potential: Vec<f64>,
    pub potential_slope: Vec<f64>,
    pub weights: Vec<f64>,
    pub boundary: Vec<BoundaryNode>,
    /// Total mass before normalization.
    pub normalization: f64,
    pub probability: bool,
}

impl WeightedMeasure1D {
    /// Measure with potential `v` (and slope `dv`) on a bounded model
    /// domain; `n_nodes` must be odd. With `probability` set, interior and
    /// boundary weights are divided by the total mass.
    pub fn with_potential(
        domain: &DomainModel,
        v: &dyn Fn(f64) -> f64,
        dv: &dyn Fn(f64) -> f64,
        n_nodes: usize,
        probability: bool,
    ) -> Result<Self> {
        domain.validate()?;
        if n_nodes < 17 || n_nodes % 2 == 0 {
            return Err(Error::invalid(format!("need an odd node count of at least 17, got {n_nodes}")));
        }
        let (a, b, geometry, ends): (f64, f64, Geometry, Vec<(usize, usize, f64)>) = match *domain {
            DomainModel::HalfLine => {
                return Err(Error::invalid("the half-line carries no finite weighted measure on a grid"))
            }
            DomainModel::Interval { length } => (0.0, length, Geometry::Line, vec![(0, 0, 1.0), (n_nodes - 1, 1, -1.0)]),
            DomainModel::Ball { radius, dim } => (0.0, radius, Geometry::Radial { dim }, vec![(n_nodes - 1, 0, -1.0)]),
            DomainModel::Annulus { r_in, r_out } => {
                (r_in, r_out, Geometry::Radial { dim: 2 }, vec![(0, 0, 1.0), (n_nodes - 1, 1, -1.0)])
            }
        };
        let h = (b - a) / (n_nodes - 1) as f64;
        let nodes: Vec<f64> = (0..n_nodes).map(|i| a + i as f64 * h).collect();
        let potential: Vec<f64> = nodes.iter().map(|&x| v(x)).collect();
        let potential_slope: Vec<f64> = nodes.iter().map(|&x| dv(x)).collect();
        if potential.iter().chain(&potential_slope).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("potential on the grid".into()));
        }
        let density: Vec<f64> = nodes.iter().zip(&potential).map(|(&x, p)| geometry.jacobian(x) * p.exp()).collect();
        let mut weights: Vec<f64> = simpson_weights(n_nodes, h).iter().zip(&density).map(|(w, d)| w * d).collect();
        let mass: f64 = weights.iter().sum();
        let mut boundary: Vec<BoundaryNode> = ends
            .into_iter()
            .map(|(index, component, normal)| BoundaryNode { index, component, normal, weight: density[index] })
            .collect();
        if probability {
            weights.iter_mut().for_each(|w| *w /= mass);
            boundary.iter_mut().for_each(|b| b.weight /= mass);
        }
        Ok(WeightedMeasure1D {
            domain: domain.clone(),
            geometry,
            nodes,
            potential,
            potential_slope,
            weights,
            boundary,
            normalization: mass,
            probability,
        })
    }

    /// Measure `e^V` of a drift field; balls and annuli need a radial `V`.
    pub fn from_drift(domain: &DomainModel, drift: &DriftField, n_nodes: usize, probability: bool) -> Result<Self> {
        if matches!(domain, DomainModel::Ball { .. } | DomainModel::Annulus { .. }) && !drift.is_radial() {
            return Err(Error::Precondition("radial measure needs a radial potential".into()));
        }
        let v = |s: f64| drift.axial_value(s);
        let dv = |s: f64| drift.grad(&point_from_coordinate(s))[0];
        Self::with_potential(domain, &v, &dv, n_nodes, probability)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ g dμ` for grid values `g`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `∫ g dμ / μ(M)`.
    pub fn average(&self, values: &[f64]) -> f64 {
        self.integrate(values) / self.mass()
    }

    /// `∫ g dμ_∂` for boundary values `g(node)`.
    pub fn integrate_boundary(&self, values: &[f64]) -> f64 {
        self.boundary.iter().map(|b| b.weight * values[b.index]).sum()
    }

    pub fn sample(&self, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        stencil_derivatives(values, self.spacing())
    }

    /// Lebesgue density of `μ` in the grid coordinate (including the Jacobian).
    pub fn density(&self) -> Vec<f64> {
        let scale = if self.probability { self.normalization } else { 1.0 };
        self.nodes
            .iter()
            .zip(&self.potential)
            .map(|(&x, p)| self.geometry.jacobian(x) * p.exp() / scale)
            .collect()
    }

    /// `Lf = f'' + ((d−1)/r + V') f'` at the nodes.
    pub fn generator(&self, f: &TestFunction<'_>) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.potential_slope)
            .map(|(&x, dv)| {
                let radial = match self.geometry {
                    Geometry::Radial { dim } if dim > 1 => (dim as f64 - 1.0) / x,
                    _ => 0.0,
                };
                let d1 = (f.first)(x);
                (f.second)(x) + if d1 == 0.0 { 0.0 } else { (radial + dv) * d1 }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_are_integrated_exactly() {
        let dom = DomainModel::interval(2.0).unwrap();
        let mu = WeightedMeasure1D::with_potential(&dom, &|_| 0.0, &|_| 0.0, 33, false).unwrap();
        let g = mu.sample(&|x| 3.0 * x * x - x + 1.0);
        assert!((mu.integrate(&g) - (8.0 - 2.0 + 2.0)).abs() < 1e-12);
        let p = WeightedMeasure1D::with_potential(&dom, &|x| -x, &|_| -1.0, 401, true).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-14);
        assert!((p.normalization - (1.0 - (-2.0f64).exp())).abs() < 1e-10);
        assert!(p.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn radial_measures_carry_the_jacobian() {
        let ball = DomainModel::ball(1.0, 3).unwrap();
        let mu = WeightedMeasure1D::with_potential(&ball, &|_| 0.0, &|_| 0.0, 101, false).unwrap();
        assert!((mu.mass() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(mu.boundary.len(), 1);
        let ann = DomainModel::annulus(0.5, 1.5).unwrap();
        let mu = WeightedMeasure1D::with_potential(&ann, &|_| 0.0, &|_| 0.0, 101, false).unwrap();
        assert!((mu.mass() - 1.0).abs() < 1e-12);
        assert_eq!((mu.boundary[0].weight, mu.boundary[1].weight), (0.5, 1.5));
        assert!(WeightedMeasure1D::with_potential(&ann, &|_| 0.0, &|_| 0.0, 100, false).is_err());
    }
}
