use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{comparison_h, DomainModel, Point};
use crate::stochastics::DriftField;

/// `Lρ = Δρ + <Z, ∇ρ>` at an interior collar point, bracketed by the
/// comparison lower bound `(d-1) h'/h(ρ) - δ_r(Z)` and the upper bound
/// `(d-1)σ + sup_∂M <Z, N> + Kρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianCheck {
    pub exact: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl LaplacianCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower_bound <= self.exact + tol && self.exact <= self.upper_bound + tol
    }
}

/// Precomputed drift constants for repeated checks on one collar.
#[derive(Debug, Clone, Copy)]
pub struct LaplacianBounds {
    r: f64,
    delta_r: f64,
    sup_normal: f64,
}

impl LaplacianBounds {
    pub fn new(domain: &DomainModel, drift: &DriftField, r: f64) -> Result<Self> {
        Ok(LaplacianBounds {
            r,
            delta_r: drift.delta_r(domain, r)?,
            sup_normal: drift.sup_boundary_normal(domain)?,
        })
    }

    pub fn check(&self, domain: &DomainModel, drift: &DriftField, x: &Point) -> Result<LaplacianCheck> {
        let curv = domain.curvature_data();
        let width = self.r.min(curv.inj_boundary);
        let rho = domain.dist_to_boundary(x)?;
        if rho >= width {
            return Err(Error::OutOfCollar { distance: rho, width });
        }
        let exact = domain.laplacian_distance(x)? + drift.grad(x).dot(&domain.grad_distance(x)?);
        let d1 = (domain.dim() - 1) as f64;
        let (h, dh, _) = comparison_h(curv.k, curv.gamma, rho);
        if h <= 0.0 {
            return Err(Error::InvalidRadius { r: rho, max: crate::geometry::curvature_cap(curv.k, curv.gamma) });
        }
        let lower_bound = if d1 == 0.0 { 0.0 } else { d1 * dh / h } - self.delta_r;
        let upper_bound = d1 * curv.sigma + self.sup_normal + drift.curvature_bound() * rho;
        Ok(LaplacianCheck { exact, lower_bound, upper_bound })
    }
}

pub fn laplacian_rho_check(domain: &DomainModel, drift: &DriftField, x: &Point, r: f64) -> Result<LaplacianCheck> {
    LaplacianBounds::new(domain, drift, r)?.check(domain, drift, x)
}
