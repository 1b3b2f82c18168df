use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ComparisonProfile, Point};
use crate::stochastics::ensemble::{Ensemble, McEstimate, McParams};
use crate::stochastics::path::{ReflectingDiffusion, TimeGrid};

/// `E^x e^{λ l_t}` on a grid of starting points, with the grid supremum as
/// the estimate of `η_λ(t) = sup_x E^x e^{λ l_t}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpMomentReport {
    pub lambda: f64,
    pub t: f64,
    pub per_point: Vec<McEstimate>,
    pub sup: McEstimate,
    pub argmax: usize,
}

impl ExpMomentReport {
    fn from_estimates(lambda: f64, t: f64, per_point: Vec<McEstimate>) -> Self {
        let argmax = per_point
            .iter()
            .enumerate()
            .fold(0, |best, (i, e)| if e.mean > per_point[best].mean { i } else { best });
        ExpMomentReport { lambda, t, sup: per_point[argmax], argmax, per_point }
    }
}

/// Exponential local-time moments at every time of `times` (each a node of
/// the `mc.dt` grid). All times share the same paths, so the estimates are
/// pathwise coupled and nondecreasing in `t`.
pub fn local_time_exp_moment_ladder(
    process: &ReflectingDiffusion<'_>,
    lambda: f64,
    times: &[f64],
    x_grid: &[Point],
    mc: &McParams,
) -> Result<Vec<ExpMomentReport>> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if x_grid.is_empty() {
        return Err(Error::invalid("empty starting-point grid"));
    }
    if times.is_empty() {
        return Err(Error::invalid("empty time ladder"));
    }
    let horizon = times.iter().cloned().fold(f64::NAN, f64::max);
    let full = TimeGrid::new(horizon, mc.dt)?;
    // Grid with the same step as the horizon grid, so the path prefixes agree.
    let stops: Vec<usize> = times.iter().map(|&t| full.index_of(t)).collect::<Result<_>>()?;
    let mut per_time: Vec<Vec<McEstimate>> = vec![Vec::with_capacity(x_grid.len()); times.len()];
    for x in x_grid {
        let ens = Ensemble::new(*process, *x, horizon, *mc)?;
        let samples = ens.map(|mut w| {
            let mut out = vec![0.0; stops.len()];
            if lambda == 0.0 {
                out.iter_mut().for_each(|o| *o = 1.0);
                return Ok(out);
            }
            let mut order: Vec<usize> = (0..stops.len()).collect();
            order.sort_by_key(|&i| stops[i]);
            for i in order {
                while w.steps_taken() < stops[i] {
                    w.step()?;
                }
                out[i] = (lambda * w.local_time()).exp();
            }
            Ok(out)
        })?;
        for (j, col) in per_time.iter_mut().enumerate() {
            let s: Vec<f64> = samples.iter().map(|v| v[j]).collect();
            col.push(McEstimate::from_samples(&s, full.dt, mc.seed));
        }
    }
    Ok(per_time
        .into_iter()
        .zip(times)
        .map(|(est, &t)| ExpMomentReport::from_estimates(lambda, t, est))
        .collect())
}

pub fn local_time_exp_moment(
    process: &ReflectingDiffusion<'_>,
    lambda: f64,
    t: f64,
    x_grid: &[Point],
    mc: &McParams,
) -> Result<ExpMomentReport> {
    Ok(local_time_exp_moment_ladder(process, lambda, &[t], x_grid, mc)?.remove(0))
}

/// Direct and reconstructed estimates of `E l_t`. The reconstruction uses
/// Itô's formula for `ψ∘ρ`: with `ψ'(0) = 1`,
/// `l_t = ψρ(X_t) - ψρ(x₀) - ∫₀ᵗ L(ψ∘ρ)(X_s) ds - (martingale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalTimeIdentity {
    pub direct: McEstimate,
    pub reconstructed: McEstimate,
    /// Standard error of the pathwise difference of the two statistics.
    pub paired_stderr: f64,
}

impl LocalTimeIdentity {
    pub fn difference(&self) -> f64 {
        self.reconstructed.mean - self.direct.mean
    }

    pub fn combined_stderr(&self) -> f64 {
        self.direct.combined_stderr(&self.reconstructed)
    }
}

/// `L(ψ∘ρ)(x) = ψ'(ρ) (Δρ + <Z, ∇ρ>) + ψ''(ρ)`, zero outside the collar.
pub fn generator_of_profile(
    process: &ReflectingDiffusion<'_>,
    profile: &ComparisonProfile,
    x: &Point,
) -> Result<f64> {
    let dom = process.domain;
    let rho = dom.signed_distance(x).max(0.0);
    if rho >= profile.radius() {
        return Ok(0.0);
    }
    let grad = dom.grad_distance(x)?;
    let l_rho = dom.laplacian_distance(x)? + process.drift.grad(x).dot(&grad);
    Ok(profile.psi_prime(rho) * l_rho + profile.psi_second(rho))
}

pub fn local_time_identity(
    process: &ReflectingDiffusion<'_>,
    profile: &ComparisonProfile,
    x0: &Point,
    t: f64,
    mc: &McParams,
) -> Result<LocalTimeIdentity> {
    let inj = process.domain.curvature_data().inj_boundary;
    if profile.radius() > inj {
        return Err(Error::InvalidRadius { r: profile.radius(), max: inj });
    }
    let ens = Ensemble::new(*process, *x0, t, *mc)?;
    let dt = ens.grid().dt;
    let psi_rho = |x: &Point| profile.psi(process.domain.signed_distance(x).max(0.0));
    let start = psi_rho(x0);
    let pairs = ens.map(|mut w| {
        let mut integral = 0.0;
        while !w.is_done() {
            integral += generator_of_profile(process, profile, &w.state())? * dt;
            w.step()?;
        }
        Ok((w.local_time(), psi_rho(&w.state()) - start - integral))
    })?;
    let (direct, recon): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let diff: Vec<f64> = recon.iter().zip(&direct).map(|(a, b)| a - b).collect();
    Ok(LocalTimeIdentity {
        direct: McEstimate::from_samples(&direct, dt, mc.seed),
        reconstructed: McEstimate::from_samples(&recon, dt, mc.seed),
        paired_stderr: McEstimate::from_samples(&diff, dt, mc.seed).stderr,
    })
}

/// Sample of `l_t` for several independent step sizes (used for bias-order
/// studies); returns one estimate per `dt`.
pub fn local_time_mean_ladder(
    process: &ReflectingDiffusion<'_>,
    x0: &Point,
    t: f64,
    dts: &[f64],
    n_paths: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<McEstimate>> {
    dts.iter()
        .map(|&dt| {
            let mc = McParams { n_paths, dt, seed, workers };
            let ens = Ensemble::new(*process, *x0, t, mc)?;
            let lt = ens.local_times()?;
            Ok(McEstimate::from_samples(&lt, ens.grid().dt, seed))
        })
        .collect()
}
