use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{r_admissible, CurvatureData, DomainModel};
use crate::stochastics::{DriftField, ExpMomentReport};

/// Closed-form envelope of `sup_x E^x e^{λ l_t}`:
/// `exp[λ d r / 2 + (λ d / r + λ δ_r + 2 λ²) t]`, valid for admissible `r`.
pub fn local_time_envelope_bound(lambda: f64, t: f64, r: f64, d: usize, delta_r: f64, curvature: &CurvatureData) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0 && t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("need finite lambda, t >= 0, got {lambda}, {t}")));
    }
    if !(delta_r.is_finite() && delta_r >= 0.0) {
        return Err(Error::invalid(format!("delta_r must be finite and nonnegative, got {delta_r}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidRadius { r, max: f64::NAN });
    }
    let max = r_admissible(curvature, r)?;
    if r > max * (1.0 + 1e-12) {
        return Err(Error::InvalidRadius { r, max });
    }
    let d = d as f64;
    Ok((lambda * d * r / 2.0 + (lambda * d / r + lambda * delta_r + 2.0 * lambda * lambda) * t).exp())
}

/// The envelope minimized over a geometric grid of admissible radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeMinimum {
    pub bound: f64,
    pub r: f64,
    pub delta_r: f64,
}

/// Number of radii tried by [`optimal_local_time_envelope`].
pub const RADIUS_GRID: usize = 96;

/// Minimizes [`local_time_envelope_bound`] over `RADIUS_GRID` radii spaced
/// geometrically up to the admissible maximum, with `δ_r` from the drift.
pub fn optimal_local_time_envelope(lambda: f64, t: f64, domain: &DomainModel, drift: &DriftField) -> Result<EnvelopeMinimum> {
    let cd = domain.curvature_data();
    let cap = r_admissible(&cd, f64::MAX)?;
    // On unbounded collars the optimum (δ = 0) sits at √(2t); search well past it.
    let top = if cap < f64::MAX { cap } else { 4.0 * (2.0 * t).sqrt().max(0.05) + 1.0 };
    let d = domain.dim();
    let mut best: Option<EnvelopeMinimum> = None;
    for i in 0..RADIUS_GRID {
        let r = top * (1e-3f64).powf(i as f64 / (RADIUS_GRID - 1) as f64);
        let delta = drift.delta_r(domain, r)?;
        let bound = local_time_envelope_bound(lambda, t, r, d, delta, &cd)?;
        if best.is_none_or(|b| bound < b.bound) {
            best = Some(EnvelopeMinimum { bound, r, delta_r: delta });
        }
    }
    Ok(best.expect("radius grid is nonempty"))
}

/// A table of `η_λ(s)` on increasing times starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaTable {
    pub lambda: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EtaTable {
    pub fn new(lambda: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::invalid("an eta table needs at least two matching times and values"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("eta times must start at 0 and increase"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 1.0 - 1e-12)) {
            return Err(Error::invalid("eta values must be finite and at least 1"));
        }
        Ok(EtaTable { lambda, times, values })
    }

    /// `η ≡ 1`, the convex-boundary case.
    pub fn constant_one(times: Vec<f64>) -> Result<Self> {
        let n = times.len();
        Self::new(0.0, times, vec![1.0; n])
    }

    /// Closed-form envelope, minimized over the radius at every time.
    pub fn envelope(lambda: f64, times: Vec<f64>, domain: &DomainModel, drift: &DriftField) -> Result<Self> {
        let values = times
            .iter()
            .map(|&s| Ok(optimal_local_time_envelope(lambda, s, domain, drift)?.bound))
            .collect::<Result<Vec<f64>>>()?;
        Self::new(lambda, times, values)
    }

    /// Monte Carlo table from a coupled ladder of grid suprema; time 0
    /// (where `η = 1`) is prepended when missing.
    pub fn from_reports(reports: &[ExpMomentReport]) -> Result<Self> {
        let lambda = reports.first().ok_or_else(|| Error::invalid("no reports"))?.lambda;
        let mut times = vec![0.0];
        let mut values = vec![1.0];
        for r in reports {
            if r.t > 0.0 {
                times.push(r.t);
                values.push(r.sup.mean.max(1.0));
            }
        }
        Self::new(lambda, times, values)
    }

    /// Prefix of the table up to node `i` (inclusive).
    pub fn prefix(&self, i: usize) -> EtaTable {
        EtaTable { lambda: self.lambda, times: self.times[..=i].to_vec(), values: self.values[..=i].to_vec() }
    }
}
