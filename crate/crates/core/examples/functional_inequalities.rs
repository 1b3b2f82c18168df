//! Deterministic checks on weighted 1D measures: integration by parts for
//! the Robin form, symmetry of the semigroup, HWI slacks and the optimal
//! time schedule behind them.

use std::f64::consts::PI;

use robin_semigroup::cli::{robin_eigenvalues, ObservableSpec, Profile};
use robin_semigroup::geometry::DomainModel;
use robin_semigroup::inequalities::{
    dirichlet_form_residual, hwi_slack, optimal_schedule, symmetry_residual, EtaTable, HwiMode, WeightedMeasure1D,
};
use robin_semigroup::stochastics::DriftField;

fn main() -> robin_semigroup::Result<()> {
    let dom = DomainModel::interval(1.0)?;
    let drift = DriftField::isotropic(-1.0, robin_semigroup::geometry::Point::zeros(), 1)?;
    let q = [0.5, -0.3];
    let mu = WeightedMeasure1D::from_drift(&dom, &drift, 401, true)?;

    println!("Robin eigenvalues of -d²/ds² on [0, 1]: {:?}", robin_eigenvalues(q[0], q[1], 1.0, 3));
    let f = Profile::new(&ObservableSpec::RobinModes { coefficients: vec![1.0, 0.5] }, &dom, &q)?;
    let g = Profile::new(&ObservableSpec::RobinBlend { from: 0.3, to: 0.7 }, &dom, &q)?;
    let r = f.with_test_function(|tf| g.with_test_function(|tg| dirichlet_form_residual(&mu, &q, tf, tg)))?;
    println!("|E(f, g) + μ(f Lg)| = {r:.2e}");

    let s = symmetry_residual(&mu, &drift, &q, &|x| (PI * x).cos(), &|x| (-(x - 0.3f64).powi(2) / 0.08).exp(), 0.1, 201)?;
    println!("μ(g P_t f) = {:.8}, μ(f P_t g) = {:.8} (PDE tolerance {:.1e})", s.lhs, s.rhs, s.pde_tolerance);

    // HWI on [0, 1] with V = -2x², where K = -4 and the boundary is flat.
    let drift = DriftField::isotropic(-2.0, robin_semigroup::geometry::Point::zeros(), 1)?;
    let mu = WeightedMeasure1D::from_drift(&dom, &drift, 401, true)?;
    let density = mu.sample(&|x| (-(x - 0.3f64).powi(2) / 0.125).exp());
    let k = drift.curvature_bound();
    let rep = hwi_slack(&mu, &density, &HwiMode::Corollary { r: 0.5, sigma: 0.0, d: 1, k, delta_r: drift.delta_r(&dom, 0.5)? })?;
    println!("\nHWI (K = {k}): H = {:.5}, I = {:.5}, W₂ = {:.5}, bound {:.5}", rep.entropy, rep.energy, rep.w2, rep.rhs);

    let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let annulus = DomainModel::annulus(0.5, 1.5)?;
    let zero = DriftField::zero(2)?;
    let eta = EtaTable::envelope(4.0, times, &annulus, &zero)?;
    let id = optimal_schedule(&eta, 0.0)?;
    println!("optimal schedule on the annulus: coefficient {:.10}, closed form {:.10}", id.coefficient, id.closed_form);
    Ok(())
}
