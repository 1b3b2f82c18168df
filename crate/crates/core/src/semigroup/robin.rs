use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::pde::{field_at_point, point_from_coordinate, solve_on_domain};
use crate::stochastics::{Ensemble, McEstimate, McParams, ReflectingDiffusion, Step, TimeGrid};

/// A bounded observable on the domain.
pub type Observable<'a> = dyn Fn(&Point) -> f64 + Sync + 'a;

/// The Robin coefficient `Q` on `∂M`.
#[derive(Clone)]
pub enum RobinCoefficient {
    /// One constant per boundary component, ordered as
    /// [`DomainModel::nearest_component`] numbers them.
    Components(Vec<f64>),
    /// A function on the boundary with a declared sup-norm bound, enforced
    /// at every evaluation.
    Function { q: Arc<dyn Fn(&Point) -> f64 + Send + Sync>, bound: f64 },
}

impl fmt::Debug for RobinCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobinCoefficient::Components(v) => f.debug_tuple("Components").field(v).finish(),
            RobinCoefficient::Function { bound, .. } => f.debug_struct("Function").field("bound", bound).finish(),
        }
    }
}

impl RobinCoefficient {
    pub fn components(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("Robin coefficients must be finite, got {values:?}")));
        }
        Ok(RobinCoefficient::Components(values))
    }

    pub fn constant(domain: &DomainModel, q: f64) -> Result<Self> {
        Self::components(vec![q; domain.boundary_components()])
    }

    pub fn zero(domain: &DomainModel) -> Self {
        RobinCoefficient::Components(vec![0.0; domain.boundary_components()])
    }

    pub fn from_fn(q: impl Fn(&Point) -> f64 + Send + Sync + 'static, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::invalid(format!("sup-norm bound must be finite, got {bound}")));
        }
        Ok(RobinCoefficient::Function { q: Arc::new(q), bound })
    }

    /// `‖Q‖_∞` (the declared bound for function coefficients).
    pub fn sup_norm(&self) -> f64 {
        match self {
            RobinCoefficient::Components(v) => v.iter().fold(0.0, |m, q| m.max(q.abs())),
            RobinCoefficient::Function { bound, .. } => *bound,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RobinCoefficient::Components(v) => v.iter().all(|q| *q == 0.0),
            RobinCoefficient::Function { .. } => false,
        }
    }

    pub fn as_components(&self) -> Option<&[f64]> {
        match self {
            RobinCoefficient::Components(v) => Some(v),
            RobinCoefficient::Function { .. } => None,
        }
    }

    pub fn validate(&self, domain: &DomainModel) -> Result<()> {
        if let RobinCoefficient::Components(v) = self {
            if v.len() != domain.boundary_components() {
                return Err(Error::invalid(format!(
                    "{} has {} boundary component(s) but {} Robin coefficient(s) were given",
                    domain.name(),
                    domain.boundary_components(),
                    v.len()
                )));
            }
        }
        Ok(())
    }

    /// `Q(y)` at a boundary point.
    pub fn value(&self, domain: &DomainModel, y: &Point) -> Result<f64> {
        match self {
            RobinCoefficient::Components(v) => Ok(v[domain.nearest_component(y)]),
            RobinCoefficient::Function { q, bound } => {
                let v = q(y);
                if !v.is_finite() || v.abs() > bound * (1.0 + 1e-12) {
                    return Err(Error::NonFinite(format!("Q = {v} exceeds its declared bound {bound}")));
                }
                Ok(v)
            }
        }
    }
}

/// Log-weight increment `Q(contact point)·Δl` of one step.
pub(crate) fn log_weight_increment(domain: &DomainModel, q: &RobinCoefficient, step: &Step) -> Result<f64> {
    if step.contact {
        Ok(q.value(domain, &step.x_end)? * step.dl)
    } else {
        Ok(0.0)
    }
}

pub(crate) fn observe(f: &Observable<'_>, x: &Point) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("observable = {v} at {:?}", x.as_slice())))
    }
}

/// `P_t^Q f(x) = E^x[f(X_t) exp(∫₀ᵗ Q(X_s) dl_s)]`.
pub fn robin_pt_mc(
    process: &ReflectingDiffusion<'_>,
    f: &Observable<'_>,
    q: &RobinCoefficient,
    x: &Point,
    t: f64,
    mc: &McParams,
) -> Result<McEstimate> {
    mc.validate()?;
    q.validate(process.domain)?;
    if t == 0.0 {
        process.domain.dist_to_boundary(x)?;
        return Ok(McEstimate::exact(observe(f, x)?, mc.n_paths, mc.dt, mc.seed));
    }
    let dom = process.domain;
    Ensemble::new(*process, *x, t, *mc)?.estimate(|mut w| {
        let mut log_w = 0.0;
        while !w.is_done() {
            let step = w.step()?;
            log_w += log_weight_increment(dom, q, &step)?;
        }
        Ok(observe(f, &w.state())? * log_w.exp())
    })
}

/// Both sides of `P_{s+t} f = P_s(P_t f)` at one point. The inner `P_t f`
/// is the PDE reference; the two outer expectations share paths, so the
/// paired standard error measures the residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemigroupResidual {
    pub direct: McEstimate,
    pub composed: McEstimate,
    pub paired_stderr: f64,
}

impl SemigroupResidual {
    pub fn residual(&self) -> f64 {
        (self.direct.mean - self.composed.mean).abs()
    }
}

/// `|P^Q_{s+t} f(x) − P^Q_s(P^Q_t f)(x)|` with the inner operator from the
/// PDE reference on `pde_nodes` nodes; `Q` must be per-component constant.
pub fn chapman_kolmogorov_residual(
    process: &ReflectingDiffusion<'_>,
    f: &Observable<'_>,
    q: &RobinCoefficient,
    x: &Point,
    s: f64,
    t: f64,
    mc: &McParams,
    pde_nodes: usize,
) -> Result<SemigroupResidual> {
    if !(s >= 0.0 && t > 0.0) {
        return Err(Error::invalid(format!("need s >= 0 and t > 0, got s = {s}, t = {t}")));
    }
    mc.validate()?;
    q.validate(process.domain)?;
    let dom = process.domain;
    let qs = q
        .as_components()
        .ok_or_else(|| Error::Precondition("the PDE reference needs per-component constant Q".into()))?;
    if s == 0.0 {
        // P₀ is the identity, so both sides are the same expression.
        let e = robin_pt_mc(process, f, q, x, t, mc)?;
        return Ok(SemigroupResidual { direct: e, composed: e, paired_stderr: 0.0 });
    }
    let x_max = crate::pde::grid_coordinate(dom, x) + 8.0 * (2.0 * s).sqrt() + 1.0;
    let f0 = |c: f64| f(&point_from_coordinate(c));
    let inner = solve_on_domain(dom, process.drift, qs, &f0, t, pde_nodes, x_max)?;
    let grid = TimeGrid::new(s + t, mc.dt)?;
    let mid = grid.index_of(s)?;
    let ens = Ensemble::new(*process, *x, s + t, *mc)?;
    let pairs = ens.map(|mut w| {
        let mut log_w = 0.0f64;
        let mut composed = 0.0;
        while !w.is_done() {
            if w.steps_taken() == mid {
                composed = field_at_point(dom, &inner, &w.state())? * log_w.exp();
            }
            let step = w.step()?;
            log_w += log_weight_increment(dom, q, &step)?;
        }
        Ok((observe(f, &w.state())? * log_w.exp(), composed))
    })?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
    Ok(SemigroupResidual {
        direct: McEstimate::from_samples(&a, grid.dt, mc.seed),
        composed: McEstimate::from_samples(&b, grid.dt, mc.seed),
        paired_stderr: McEstimate::from_samples(&diff, grid.dt, mc.seed).stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::local_time_envelope_bound;
    use crate::stochastics::DriftField;

    fn p1(x: f64) -> Point {
        Point::new(x, 0.0, 0.0)
    }

    #[test]
    fn trivial_cases_are_exact() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let mc = McParams::new(500, 1e-3, 4);
        let one = robin_pt_mc(&proc, &|_| 1.0, &RobinCoefficient::zero(&dom), &p1(0.1), 0.3, &mc).unwrap();
        assert_eq!((one.mean, one.stderr), (1.0, 0.0));
        let q = RobinCoefficient::components(vec![0.5, -0.3]).unwrap();
        let f = |x: &Point| (std::f64::consts::PI * x[0]).cos();
        let at0 = robin_pt_mc(&proc, &f, &q, &p1(0.2), 0.0, &mc).unwrap();
        assert_eq!((at0.mean, at0.stderr), (f(&p1(0.2)), 0.0));
        assert!(robin_pt_mc(&proc, &f, &RobinCoefficient::components(vec![1.0]).unwrap(), &p1(0.2), 0.1, &mc).is_err());
        assert!(robin_pt_mc(&proc, &|_| f64::INFINITY, &q, &p1(0.2), 0.1, &mc).is_err());
    }

    #[test]
    fn weights_are_positive_and_bounded() {
        let dom = DomainModel::annulus(0.5, 1.5).unwrap();
        let z = DriftField::zero(2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let q = RobinCoefficient::components(vec![1.0, -0.5]).unwrap();
        let f = |x: &Point| 1.0 + x[0].sin();
        let t = 0.3;
        let e = robin_pt_mc(&proc, &f, &q, &Point::new(0.55, 0.0, 0.0), t, &McParams::new(2000, 1e-3, 9)).unwrap();
        assert!(e.mean >= 0.0);
        // Uniform bound |P_t^Q f| ≤ ‖f‖_∞ · (local-time envelope at λ = ‖Q‖_∞).
        let cd = dom.curvature_data();
        let bound = local_time_envelope_bound(q.sup_norm(), t, 0.5, 2, 0.0, &cd).unwrap();
        assert!(e.mean <= 2.0 * bound);
    }

    #[test]
    fn function_coefficients_enforce_their_bound() {
        let dom = DomainModel::ball(1.0, 2).unwrap();
        let good = RobinCoefficient::from_fn(|y: &Point| 0.5 * y[0], 0.5).unwrap();
        assert_eq!(good.value(&dom, &Point::new(1.0, 0.0, 0.0)).unwrap(), 0.5);
        let bad = RobinCoefficient::from_fn(|y: &Point| 2.0 * y[0], 0.5).unwrap();
        assert!(bad.value(&dom, &Point::new(1.0, 0.0, 0.0)).is_err());
        assert!(RobinCoefficient::from_fn(|_: &Point| 0.0, f64::NAN).is_err());
    }

    #[test]
    fn semigroup_property_trivial_cases() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let mc = McParams::new(200, 1e-3, 1);
        let zero = RobinCoefficient::zero(&dom);
        let r = chapman_kolmogorov_residual(&proc, &|_| 1.0, &zero, &p1(0.3), 0.1, 0.1, &mc, 65).unwrap();
        assert!(r.residual() < 1e-12, "{}", r.residual());
        let q = RobinCoefficient::components(vec![0.5, -0.3]).unwrap();
        let r = chapman_kolmogorov_residual(&proc, &|x: &Point| x[0], &q, &p1(0.3), 0.0, 0.1, &mc, 65).unwrap();
        assert_eq!(r.residual(), 0.0);
    }
}
