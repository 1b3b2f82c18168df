use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::semigroup::plateau::{plateau, plateau_integral};
use crate::semigroup::robin::{log_weight_increment, observe, Observable, RobinCoefficient};
use crate::stochastics::{DriftField, Ensemble, McEstimate, McParams, ReflectingDiffusion};

/// Smooth extension `Q̃ = Q h̃(ρ)` of a per-component Robin coefficient into
/// the collar, the boundary-flattened distance `ψ_n = (1/n)∫₀^{nρ} Φ`, and
/// the bounded potential `L(Q̃ψ_n)`.
///
/// With `G = Q̃ψ_n`, Itô's formula gives
/// `∫Q dl = G(X_t) − G(x) − ∫L G ds − M_n(t)`, which is what
/// [`schrodinger_pt_mc`] uses to relate the Schrödinger semigroup to `P_t^Q`.
#[derive(Debug, Clone)]
pub struct SchrodingerExtension<'a> {
    domain: &'a DomainModel,
    drift: &'a DriftField,
    q: Vec<f64>,
    r: f64,
    n: f64,
}

/// `h̃(s) = Φ(1 + s/r)`: 1 with all derivatives 0 at `s = 0`, 0 beyond `r`.
fn bump(s: f64, r: f64) -> (f64, f64, f64) {
    let (p, d1, d2) = plateau(1.0 + s / r);
    (p, d1 / r, d2 / (r * r))
}

pub fn build_schrodinger_extension<'a>(
    domain: &'a DomainModel,
    drift: &'a DriftField,
    q: &RobinCoefficient,
    r: f64,
    n: f64,
) -> Result<SchrodingerExtension<'a>> {
    q.validate(domain)?;
    let qs = q
        .as_components()
        .ok_or_else(|| Error::Precondition("the collar extension needs per-component constant Q".into()))?;
    let inj = domain.curvature_data().inj_boundary;
    if !(r.is_finite() && r > 0.0 && r <= inj) {
        return Err(Error::InvalidRadius { r, max: inj });
    }
    if !(n.is_finite() && n * r >= 1.0) {
        return Err(Error::invalid(format!("need n >= 1/r, got n = {n}, r = {r}")));
    }
    Ok(SchrodingerExtension { domain, drift, q: qs.to_vec(), r, n })
}

impl SchrodingerExtension<'_> {
    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn index(&self) -> f64 {
        self.n
    }

    fn rho(&self, x: &Point) -> f64 {
        self.domain.signed_distance(x).max(0.0)
    }

    /// `ψ_n` as a function of the distance, with two derivatives.
    pub fn psi_n_profile(&self, rho: f64) -> (f64, f64, f64) {
        let n = self.n;
        let (p, d1, _) = plateau(n * rho);
        (plateau_integral(n * rho) / n, p, n * d1)
    }

    /// `H = h̃ ψ_n` with two derivatives; `G = q H(ρ)`.
    fn profile(&self, rho: f64) -> (f64, f64, f64) {
        if rho >= self.r {
            return (0.0, 0.0, 0.0);
        }
        let (b, b1, b2) = bump(rho, self.r);
        let (p, p1, p2) = self.psi_n_profile(rho);
        (b * p, b1 * p + b * p1, b2 * p + 2.0 * b1 * p1 + b * p2)
    }

    fn coefficient(&self, x: &Point) -> f64 {
        self.q[self.domain.nearest_component(x)]
    }

    pub fn q_tilde(&self, x: &Point) -> f64 {
        self.coefficient(x) * bump(self.rho(x), self.r).0
    }

    pub fn psi_n(&self, x: &Point) -> f64 {
        self.psi_n_profile(self.rho(x)).0
    }

    /// `G = Q̃ ψ_n`.
    pub fn product(&self, x: &Point) -> f64 {
        self.coefficient(x) * self.profile(self.rho(x)).0
    }

    /// `∇G`.
    pub fn product_gradient(&self, x: &Point) -> Result<Point> {
        let rho = self.rho(x);
        if rho >= self.r {
            return Ok(Point::zeros());
        }
        Ok(self.domain.grad_distance(x)? * (self.coefficient(x) * self.profile(rho).1))
    }

    /// The potential `L(Q̃ψ_n) = q (H'(ρ) Lρ + H''(ρ))`.
    pub fn potential(&self, x: &Point) -> Result<f64> {
        let rho = self.rho(x);
        if rho >= self.r {
            return Ok(0.0);
        }
        let (_, h1, h2) = self.profile(rho);
        let grad = self.domain.grad_distance(x)?;
        let l_rho = self.domain.laplacian_distance(x)? + self.drift.grad(x).dot(&grad);
        Ok(self.coefficient(x) * (h1 * l_rho + h2))
    }

    /// `sup |L(Q̃ψ_n)|` over points at `samples` distances inside the collar
    /// along the normals through each boundary sample.
    pub fn potential_sup(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let comps = self.domain.boundary_components();
        for c in 0..comps {
            for i in 0..=samples {
                let s = self.r * i as f64 / samples as f64;
                for (u, v) in [(0.0, 0.0), (0.3, 0.7), (0.8, 0.2)] {
                    let x = self.domain.point_at_distance(c, s, u, v);
                    worst = worst.max(self.potential(&x)?.abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Schrödinger approximation of `P_t^Q f(x)` at one point, on common paths:
/// `raw = E[f e^{-∫L G}]`, `corrected` multiplies in `e^{G(X_t) − G(x) − M_n}`,
/// and `robin` is the direct Feynman–Kac estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchrodingerReport {
    pub n: f64,
    pub raw: McEstimate,
    pub corrected: McEstimate,
    pub robin: McEstimate,
    /// Standard errors of the pathwise differences to `robin`.
    pub raw_paired_stderr: f64,
    pub corrected_paired_stderr: f64,
}

impl SchrodingerReport {
    pub fn raw_residual(&self) -> f64 {
        (self.raw.mean - self.robin.mean).abs()
    }

    pub fn corrected_residual(&self) -> f64 {
        (self.corrected.mean - self.robin.mean).abs()
    }

    pub fn raw_combined_stderr(&self) -> f64 {
        self.raw.combined_stderr(&self.robin)
    }
}

pub fn schrodinger_pt_mc(
    process: &ReflectingDiffusion<'_>,
    f: &Observable<'_>,
    ext: &SchrodingerExtension<'_>,
    x: &Point,
    t: f64,
    mc: &McParams,
) -> Result<SchrodingerReport> {
    if !std::ptr::eq(process.domain, ext.domain) && process.domain != ext.domain {
        return Err(Error::invalid("extension was built for a different domain"));
    }
    let q = RobinCoefficient::Components(ext.q.clone());
    let dom = process.domain;
    let ens = Ensemble::new(*process, *x, t, *mc)?;
    let dt = ens.grid().dt;
    let g0 = ext.product(x);
    let rows = ens.map(|mut w| {
        let (mut int_lg, mut mart, mut robin) = (0.0, 0.0, 0.0);
        while !w.is_done() {
            let xs = w.state();
            int_lg += ext.potential(&xs)? * dt;
            let grad = ext.product_gradient(&xs)?;
            let step = w.step()?;
            mart += std::f64::consts::SQRT_2 * grad.dot(&step.db);
            robin += log_weight_increment(dom, &q, &step)?;
        }
        let fx = observe(f, &w.state())?;
        let corr = ext.product(&w.state()) - g0 - mart;
        Ok([fx * (-int_lg).exp(), fx * (corr - int_lg).exp(), fx * robin.exp()])
    })?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let diff = |i: usize| rows.iter().map(|r| r[i] - r[2]).collect::<Vec<f64>>();
    let est = |v: &[f64]| McEstimate::from_samples(v, dt, mc.seed);
    Ok(SchrodingerReport {
        n: ext.n,
        raw: est(&col(0)),
        corrected: est(&col(1)),
        robin: est(&col(2)),
        raw_paired_stderr: est(&diff(0)).stderr,
        corrected_paired_stderr: est(&diff(1)).stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p1(x: f64) -> Point {
        Point::new(x, 0.0, 0.0)
    }

    #[test]
    fn extension_invariants_on_interval() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let q = RobinCoefficient::components(vec![0.5, -0.3]).unwrap();
        for n in [4.0, 8.0, 16.0] {
            let e = build_schrodinger_extension(&dom, &z, &q, 0.5, n).unwrap();
            assert_eq!(e.q_tilde(&p1(0.0)), 0.5);
            assert_eq!(e.q_tilde(&p1(1.0)), -0.3);
            // One-sided differences of Q̃ along the inward normal vanish.
            let h = 1e-4;
            assert!((e.q_tilde(&p1(h)) - e.q_tilde(&p1(0.0))).abs() / h < 1e-8);
            assert!((e.q_tilde(&p1(1.0 - h)) - e.q_tilde(&p1(1.0))).abs() / h < 1e-8);
            let sup = e.potential_sup(4000).unwrap();
            assert!(sup.is_finite() && sup > 0.0);
        }
        let zero = build_schrodinger_extension(&dom, &z, &RobinCoefficient::zero(&dom), 0.5, 4.0).unwrap();
        assert_eq!(zero.potential_sup(100).unwrap(), 0.0);
        assert!(build_schrodinger_extension(&dom, &z, &q, 0.6, 4.0).is_err());
        assert!(build_schrodinger_extension(&dom, &z, &q, 0.5, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn psi_n_properties(rho in 0.0f64..0.5, n in 2.0f64..32.0) {
            let dom = DomainModel::interval(1.0).unwrap();
            let z = DriftField::zero(1).unwrap();
            let q = RobinCoefficient::components(vec![1.0, 1.0]).unwrap();
            let e = build_schrodinger_extension(&dom, &z, &q, 0.5, n).unwrap();
            let (psi, d1, _) = e.psi_n_profile(rho);
            prop_assert!((0.0..=2.0 / n).contains(&psi));
            prop_assert!((0.0..=1.0).contains(&d1));
            if rho <= 1.0 / n {
                prop_assert!((psi - rho).abs() < 1e-14);
            }
            if rho >= 2.0 / n {
                prop_assert!((psi - 1.5 / n).abs() < 1e-12 && d1 == 0.0);
            }
        }

        #[test]
        fn potential_matches_finite_differences(x in 0.02f64..0.48) {
            // In 1D with V = 0, L G = G''.
            let dom = DomainModel::interval(1.0).unwrap();
            let z = DriftField::zero(1).unwrap();
            let q = RobinCoefficient::components(vec![0.7, -0.2]).unwrap();
            let e = build_schrodinger_extension(&dom, &z, &q, 0.5, 8.0).unwrap();
            let h = 1e-4;
            let fd = (e.product(&p1(x + h)) - 2.0 * e.product(&p1(x)) + e.product(&p1(x - h))) / (h * h);
            let lg = e.potential(&p1(x)).unwrap();
            prop_assert!((fd - lg).abs() < 1e-4 * (1.0 + lg.abs()), "{} vs {}", fd, lg);
        }
    }

    #[test]
    fn zero_coefficient_reduces_to_neumann_pathwise() {
        let dom = DomainModel::annulus(0.5, 1.5).unwrap();
        let z = DriftField::zero(2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let e = build_schrodinger_extension(&dom, &z, &RobinCoefficient::zero(&dom), 0.5, 4.0).unwrap();
        let f = |x: &Point| x[0] * x[0];
        let rep = schrodinger_pt_mc(&proc, &f, &e, &Point::new(0.7, 0.0, 0.0), 0.2, &McParams::new(300, 1e-2, 1)).unwrap();
        assert_eq!(rep.raw, rep.robin);
        assert_eq!(rep.corrected, rep.robin);
    }

    #[test]
    fn corrected_estimator_tracks_robin() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let q = RobinCoefficient::components(vec![0.5, -0.3]).unwrap();
        let e = build_schrodinger_extension(&dom, &z, &q, 0.5, 8.0).unwrap();
        let f = |x: &Point| 1.0 + x[0];
        let rep = schrodinger_pt_mc(&proc, &f, &e, &p1(0.2), 0.2, &McParams::new(2000, 2.5e-4, 7)).unwrap();
        assert!(rep.corrected_residual() < 3.0 * rep.corrected_paired_stderr + 0.02, "{rep:?}");
    }
}
