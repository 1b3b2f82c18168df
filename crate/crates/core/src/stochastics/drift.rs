use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};

/// Closed-form potentials `V`; the drift is `Z = ∇V`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// `V(x) = ½ (x - c)ᵀ H (x - c)`.
    Quadratic { hessian: Matrix3<f64>, center: Point },
    /// `V(x) = <g, x>`.
    Linear { gradient: Point },
}

/// Gradient drift `Z = ∇V` on a flat domain together with its curvature
/// constants: since `Ric = 0`, the condition `Ric - ∇Z ≥ -K` reads
/// `Hess V ≤ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    potential: Potential,
    dim: usize,
    curvature_bound: f64,
}

fn mask(dim: usize) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for i in 0..dim {
        m[(i, i)] = 1.0;
    }
    m
}

impl DriftField {
    pub fn new(potential: Potential, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        let p = mask(dim);
        let potential = match potential {
            Potential::Quadratic { hessian, center } => {
                if hessian.iter().chain(center.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("quadratic potential coefficients".into()));
                }
                if (hessian - hessian.transpose()).abs().max() > 1e-12 {
                    return Err(Error::invalid("Hessian must be symmetric"));
                }
                Potential::Quadratic { hessian: p * hessian * p, center: p * center }
            }
            Potential::Linear { gradient } => {
                if gradient.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("linear potential gradient".into()));
                }
                Potential::Linear { gradient: p * gradient }
            }
            Potential::Zero => Potential::Zero,
        };
        let curvature_bound = match &potential {
            Potential::Quadratic { hessian, .. } => {
                let block = hessian.view((0, 0), (dim, dim)).clone_owned();
                SymmetricEigen::new(block).eigenvalues.max()
            }
            _ => 0.0,
        };
        Ok(DriftField { potential, dim, curvature_bound })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(Potential::Zero, dim)
    }

    /// `V(x) = a |x - c|²`.
    pub fn isotropic(a: f64, center: Point, dim: usize) -> Result<Self> {
        Self::new(Potential::Quadratic { hessian: Matrix3::identity() * (2.0 * a), center }, dim)
    }

    pub fn linear(gradient: Point, dim: usize) -> Result<Self> {
        Self::new(Potential::Linear { gradient }, dim)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.potential == Potential::Zero
    }

    pub fn value(&self, x: &Point) -> f64 {
        match &self.potential {
            Potential::Zero => 0.0,
            Potential::Quadratic { hessian, center } => {
                let y = mask(self.dim) * (x - center);
                0.5 * y.dot(&(hessian * y))
            }
            Potential::Linear { gradient } => gradient.dot(x),
        }
    }

    /// `Z(x) = ∇V(x)`.
    pub fn grad(&self, x: &Point) -> Point {
        match &self.potential {
            Potential::Zero => Point::zeros(),
            Potential::Quadratic { hessian, center } => hessian * (mask(self.dim) * (x - center)),
            Potential::Linear { gradient } => *gradient,
        }
    }

    pub fn hessian(&self) -> Matrix3<f64> {
        match &self.potential {
            Potential::Quadratic { hessian, .. } => *hessian,
            _ => Matrix3::zeros(),
        }
    }

    /// Smallest `K` with `Hess V ≤ K` everywhere (the Hessian is constant).
    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    /// Pointwise curvature function κ₁: the largest eigenvalue of `Hess V` at `x`.
    pub fn kappa1(&self, _x: &Point) -> f64 {
        self.curvature_bound
    }

    /// `V` along the first coordinate axis; the potential seen by the 1D and
    /// radial PDE solvers.
    pub fn axial_value(&self, s: f64) -> f64 {
        self.value(&Point::new(s, 0.0, 0.0))
    }

    /// Whether `V` depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match &self.potential {
            Potential::Zero => true,
            Potential::Linear { gradient } => self.dim == 1 && gradient.norm() == 0.0,
            Potential::Quadratic { hessian, center } => {
                let a = hessian[(0, 0)];
                center.norm() == 0.0 && (hessian - mask(self.dim) * a).abs().max() == 0.0
            }
        }
    }

    /// `δ_r(Z) = sup over the r-collar of <Z, ∇ρ>⁻`, evaluated on a grid of
    /// normal lines. Along each normal line `<Z, ∇ρ>` is affine for the
    /// potentials supported here, so the grid includes both collar ends.
    pub fn delta_r(&self, domain: &DomainModel, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!("collar width must be finite and nonnegative, got {r}")));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let width = r.min(domain.curvature_data().inj_boundary);
        let layers = 17;
        let mut worst: f64 = 0.0;
        // ∇ρ is constant along each straight normal line of a flat collar.
        for y in domain.boundary_samples(1024) {
            let n = domain.grad_distance(&y)?;
            for j in 0..layers {
                let s = width * j as f64 / (layers - 1) as f64;
                worst = worst.max(-self.grad(&(y + n * s)).dot(&n));
            }
        }
        Ok(worst)
    }

    /// `sup over ∂M of <Z, N>`, on the boundary sample.
    pub fn sup_boundary_normal(&self, domain: &DomainModel) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for y in domain.boundary_samples(1024) {
            let n = domain.boundary_frame(&y)?.normal;
            best = best.max(self.grad(&y).dot(&n));
        }
        Ok(best)
    }
}
