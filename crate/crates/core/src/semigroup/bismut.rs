use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::semigroup::robin::{observe, Observable};
use crate::stochastics::{DampedTransport, Ensemble, McEstimate, McParams, McVecEstimate, ReflectingDiffusion, TransportFlags};

/// A schedule `h` on `[0, t]` with `h(0) = 0`, `h(t) = 1`, stored as its
/// profile `φ` on `[0, 1]` (`h(s) = φ(s / t)`).
#[derive(Clone)]
pub enum Schedule {
    Linear,
    /// `φ(u) = u²(3 - 2u)`.
    Smoothstep,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Smoothstep
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::Smoothstep => "smoothstep",
            Schedule::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Schedule::Linear),
            "smoothstep" => Ok(Schedule::Smoothstep),
            other => Err(Error::invalid(format!("unknown schedule '{other}' (expected linear or smoothstep)"))),
        }
    }

    pub fn profile(&self, u: f64) -> f64 {
        match self {
            Schedule::Linear => u,
            Schedule::Smoothstep => u * u * (3.0 - 2.0 * u),
            Schedule::Custom(phi) => phi(u),
        }
    }

    /// Checks the endpoint conditions and monotonicity on a fine grid.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.profile(0.0), self.profile(1.0));
        if !(a.abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12) {
            return Err(Error::invalid(format!("schedule needs h(0) = 0 and h(t) = 1, got {a} and {b}")));
        }
        let mut prev = a;
        for i in 1..=1024 {
            let v = self.profile(i as f64 / 1024.0);
            if !v.is_finite() || v < prev - 1e-12 {
                return Err(Error::invalid("schedule must be finite and nondecreasing"));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Bismut weights `W = Σ_k (Δh_k / Δt) 𝕄_k ΔB_k` for several schedules on
/// one set of paths, with `f(X_t)`.
fn bismut_samples(
    process: &ReflectingDiffusion<'_>,
    f: &Observable<'_>,
    x: &Point,
    t: f64,
    schedules: &[Schedule],
    mc: &McParams,
    flags: TransportFlags,
) -> Result<(Vec<(f64, Vec<Point>)>, f64)> {
    for s in schedules {
        s.validate()?;
    }
    let ens = Ensemble::new(*process, *x, t, *mc)?;
    let grid = ens.grid();
    let dt = grid.dt;
    // Per-step schedule increments, shared by every path.
    let rates: Vec<Vec<f64>> = schedules
        .iter()
        .map(|s| {
            (0..grid.n_steps)
                .map(|k| (s.profile(grid.time(k + 1) / t) - s.profile(grid.time(k) / t)) / dt)
                .collect()
        })
        .collect();
    let samples = ens.map(|mut w| {
        let mut transport = DampedTransport::new(process.domain, process.drift, dt, flags);
        let mut weights = vec![Point::zeros(); schedules.len()];
        while !w.is_done() {
            let k = w.steps_taken();
            let step = w.step()?;
            let m_db = transport.matrix() * step.db;
            for (wt, r) in weights.iter_mut().zip(&rates) {
                *wt += m_db * r[k];
            }
            transport.advance(&step)?;
        }
        Ok((observe(f, &w.state())?, weights))
    })?;
    Ok((samples, dt))
}

fn contract(samples: &[(f64, Vec<Point>)], which: usize, dim: usize, dt: f64, seed: u64) -> McVecEstimate {
    let n = samples.len();
    // Centring by the sample mean of f(X_t) cancels the mean-zero weight's
    // contribution from the constant part of f; the n/(n-1) factor makes
    // the centred estimator unbiased.
    let fbar = samples.iter().map(|s| s.0).sum::<f64>() / n as f64;
    let scale = if n > 1 { n as f64 / (n - 1) as f64 } else { 1.0 } / std::f64::consts::SQRT_2;
    let comps: Vec<Vec<f64>> = (0..dim)
        .map(|i| samples.iter().map(|(fx, w)| scale * (fx - fbar) * w[which][i]).collect())
        .collect();
    McVecEstimate::from_components(&comps, n, dt, seed)
}

/// `∇P_t f(x) = (1/√2) E[f(X_t) ∫₀ᵗ h'(s) 𝕄_s dB_s]` for the Neumann
/// semigroup.
pub fn bismut_gradient_mc(
    process: &ReflectingDiffusion<'_>,
    f: &Observable<'_>,
    x: &Point,
    t: f64,
    schedule: &Schedule,
    mc: &McParams,
    flags: TransportFlags,
) -> Result<McVecEstimate> {
    Ok(bismut_gradient_schedules(process, f, x, t, std::slice::from_ref(schedule), mc, flags)?.remove(0))
}

/// [`bismut_gradient_mc`] for several schedules on common paths.
pub fn bismut_gradient_schedules(
    process: &ReflectingDiffusion<'_>,
    f: &Observable<'_>,
    x: &Point,
    t: f64,
    schedules: &[Schedule],
    mc: &McParams,
    flags: TransportFlags,
) -> Result<Vec<McVecEstimate>> {
    let (samples, dt) = bismut_samples(process, f, x, t, schedules, mc, flags)?;
    let dim = process.dim();
    Ok((0..schedules.len()).map(|i| contract(&samples, i, dim, dt, mc.seed)).collect())
}

/// Right-hand side of `|∇P_t f|(x) ≤ E^x[|∇f|(X_t) exp(∫κ₁(X_s) ds + ∫κ₂(X_s) dl_s)]`.
pub fn hsu_bound_rhs_mc(
    process: &ReflectingDiffusion<'_>,
    grad_f_norm: &Observable<'_>,
    kappa1: &Observable<'_>,
    kappa2: &Observable<'_>,
    x: &Point,
    t: f64,
    mc: &McParams,
) -> Result<McEstimate> {
    let ens = Ensemble::new(*process, *x, t, *mc)?;
    let dt = ens.grid().dt;
    ens.estimate(|mut w| {
        let mut log_w = 0.0;
        while !w.is_done() {
            let k1 = observe(kappa1, &w.state())?;
            let step = w.step()?;
            log_w += k1 * dt;
            if step.contact {
                log_w += observe(kappa2, &step.x_end)? * step.dl;
            }
        }
        Ok(observe(grad_f_norm, &w.state())? * log_w.exp())
    })
}

/// Gradient estimate with its Hsu envelope at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientEnvelope {
    pub gradient: McVecEstimate,
    pub envelope: McEstimate,
}

impl GradientEnvelope {
    /// `envelope − |gradient|`, nonnegative when the envelope holds.
    pub fn margin(&self) -> f64 {
        self.envelope.mean - self.gradient.norm()
    }

    pub fn combined_stderr(&self) -> f64 {
        self.envelope.stderr.hypot(self.gradient.norm_stderr())
    }
}
