use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::measure::WeightedMeasure1D;
use crate::pde::{solve_on_domain, GridField};
use crate::semigroup::{TestFunction, D0_TOLERANCE};
use crate::stochastics::DriftField;

fn robin_defect(mu: &WeightedMeasure1D, q: &[f64], f: &TestFunction<'_>) -> f64 {
    mu.boundary
        .iter()
        .map(|b| {
            let x = mu.nodes[b.index];
            (b.normal * (f.first)(x) + q[b.component] * (f.value)(x)).abs()
        })
        .fold(0.0, f64::max)
}

fn check_q(mu: &WeightedMeasure1D, q: &[f64]) -> Result<()> {
    if q.len() != mu.domain.boundary_components() {
        return Err(Error::invalid(format!(
            "{} boundary component(s) but {} Robin coefficient(s)",
            mu.domain.boundary_components(),
            q.len()
        )));
    }
    Ok(())
}

/// The Dirichlet form `E(f, g) = μ(<∇f, ∇g>) − μ_∂(Q f g)`.
pub fn dirichlet_form(mu: &WeightedMeasure1D, q: &[f64], f: &TestFunction<'_>, g: &TestFunction<'_>) -> Result<f64> {
    check_q(mu, q)?;
    let grad: Vec<f64> = mu.nodes.iter().map(|&x| (f.first)(x) * (g.first)(x)).collect();
    let fg: Vec<f64> = mu.nodes.iter().map(|&x| (f.value)(x) * (g.value)(x)).collect();
    let boundary: f64 = mu.boundary.iter().map(|b| b.weight * q[b.component] * fg[b.index]).sum();
    Ok(mu.integrate(&grad) - boundary)
}

/// `|E(f, g) + μ(f Lg)|` for `f, g` in the Robin domain.
pub fn dirichlet_form_residual(
    mu: &WeightedMeasure1D,
    q: &[f64],
    f: &TestFunction<'_>,
    g: &TestFunction<'_>,
) -> Result<f64> {
    check_q(mu, q)?;
    for (name, h) in [("f", f), ("g", g)] {
        let d = robin_defect(mu, q, h);
        if !(d <= D0_TOLERANCE) {
            return Err(Error::Precondition(format!("{name} violates the Robin condition: |Nf + Qf| = {d:.3e}")));
        }
    }
    let lg = mu.generator(g);
    let f_lg: Vec<f64> = mu.nodes.iter().zip(&lg).map(|(&x, l)| (f.value)(x) * l).collect();
    Ok((dirichlet_form(mu, q, f, g)? + mu.integrate(&f_lg)).abs())
}

/// Both sides of `μ(g P_t^Q f) = μ(f P_t^Q g)` with the PDE reference,
/// and the Richardson tolerance from repeating the solves on half the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub pde_tolerance: f64,
}

impl SymmetryResidual {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

fn sides(
    mu: &WeightedMeasure1D,
    drift: &DriftField,
    q: &[f64],
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    t: f64,
    n_nodes: usize,
) -> Result<(f64, f64)> {
    let solve = |h: &dyn Fn(f64) -> f64| -> Result<GridField> { solve_on_domain(&mu.domain, drift, q, h, t, n_nodes, 0.0) };
    let pf = solve(f)?;
    let pg = solve(g)?;
    let eval = |field: &GridField| mu.nodes.iter().map(|&x| field.value_at(x)).collect::<Result<Vec<f64>>>();
    let (pf, pg) = (eval(&pf)?, eval(&pg)?);
    let gpf: Vec<f64> = mu.nodes.iter().zip(&pf).map(|(&x, p)| g(x) * p).collect();
    let fpg: Vec<f64> = mu.nodes.iter().zip(&pg).map(|(&x, p)| f(x) * p).collect();
    Ok((mu.integrate(&gpf), mu.integrate(&fpg)))
}

/// Symmetry of `P_t^Q` in `L²(μ)`; `μ` must be the measure `e^V` of
/// `drift`, the drift being the gradient of `V`.
pub fn symmetry_residual(
    mu: &WeightedMeasure1D,
    drift: &DriftField,
    q: &[f64],
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    t: f64,
    pde_nodes: usize,
) -> Result<SymmetryResidual> {
    check_q(mu, q)?;
    let reference = WeightedMeasure1D::from_drift(&mu.domain, drift, mu.len(), mu.probability)?;
    let scale = mu.potential.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mismatch = mu
        .potential
        .iter()
        .zip(&reference.potential)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if mismatch > 1e-12 * scale {
        return Err(Error::Precondition("the measure is not e^V for the drift's potential".into()));
    }
    let (lhs, rhs) = sides(mu, drift, q, f, g, t, pde_nodes)?;
    let (lc, rc) = sides(mu, drift, q, f, g, t, pde_nodes.div_ceil(2).max(crate::pde::MIN_NODES))?;
    let pde_tolerance = (lhs - lc).abs().max((rhs - rc).abs());
    Ok(SymmetryResidual { lhs, rhs, pde_tolerance })
}
