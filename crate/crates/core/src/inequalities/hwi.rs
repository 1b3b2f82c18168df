use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::envelope::EtaTable;
use crate::inequalities::functionals::{entropy_and_energy, normalize, w2_1d, xlogx};
use crate::inequalities::measure::WeightedMeasure1D;
use crate::pde::solve_on_domain;
use crate::stochastics::DriftField;

/// Trapezoid integrals `A(t) = ∫₀ᵗ e^{2Ks} η(s) ds` and
/// `B(t) = ∫₀ᵗ e^{-2Ks} η(s)⁻¹ ds` at every node of the table.
pub fn schedule_integrals(eta: &EtaTable, k: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut a, mut b) = (vec![0.0], vec![0.0]);
    for i in 1..eta.times.len() {
        let (s0, s1) = (eta.times[i - 1], eta.times[i]);
        let h = s1 - s0;
        let fa = |s: f64, e: f64| (2.0 * k * s).exp() * e;
        let fb = |s: f64, e: f64| (-2.0 * k * s).exp() / e;
        a.push(a[i - 1] + 0.5 * h * (fa(s0, eta.values[i - 1]) + fa(s1, eta.values[i])));
        b.push(b[i - 1] + 0.5 * h * (fb(s0, eta.values[i - 1]) + fb(s1, eta.values[i])));
    }
    (a, b)
}

/// The optimal schedule `h_s = ∫ₛᵗ e^{-2Ku} η⁻¹ du / ∫₀ᵗ e^{-2Ku} η⁻¹ du` on
/// the table, and the transport coefficient `¼ ∫₀ᵗ ḣ_s² e^{2Ks} η(s) ds`
/// it produces, next to the closed form `1 / (4 B(t))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleIdentity {
    pub schedule: Vec<f64>,
    pub coefficient: f64,
    pub closed_form: f64,
}

impl ScheduleIdentity {
    pub fn defect(&self) -> f64 {
        (self.coefficient - self.closed_form).abs()
    }
}

pub fn optimal_schedule(eta: &EtaTable, k: f64) -> Result<ScheduleIdentity> {
    let (_, b) = schedule_integrals(eta, k);
    let total = *b.last().unwrap();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::invalid("degenerate schedule integral"));
    }
    let schedule: Vec<f64> = b.iter().map(|bi| (total - bi) / total).collect();
    // ḣ_s = -e^{-2Ks} η(s)⁻¹ / B(t) at the nodes.
    let integrand: Vec<f64> = eta
        .times
        .iter()
        .zip(&eta.values)
        .map(|(&s, &e)| {
            let hdot = -(-2.0 * k * s).exp() / e / total;
            hdot * hdot * (2.0 * k * s).exp() * e
        })
        .collect();
    let integral: f64 = eta
        .times
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, g)| 0.5 * (t[1] - t[0]) * (g[0] + g[1]))
        .sum();
    Ok(ScheduleIdentity { schedule, coefficient: 0.25 * integral, closed_form: 0.25 / total })
}

/// Which HWI inequality to test.
#[derive(Debug, Clone, PartialEq)]
pub enum HwiMode {
    /// `H ≤ 4 A(t) I + W² / (4 B(t))`, minimized over the table times.
    Theorem { eta: EtaTable, k: f64 },
    /// `H ≤ 2 e^{2σd/r} √I W + K_r e^{2σd/r} W² / 2` with
    /// `K_r = K + σd/r + σ δ_r + 4σ²`.
    Corollary { r: f64, sigma: f64, d: usize, k: f64, delta_r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HwiReport {
    pub entropy: f64,
    pub energy: f64,
    pub w2: f64,
    pub rhs: f64,
    /// Time at which the theorem form was minimized.
    pub t_opt: Option<f64>,
}

impl HwiReport {
    pub fn lhs(&self) -> f64 {
        self.entropy
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.entropy
    }
}

/// Slack of the selected HWI inequality for `f` (normalized internally
/// so that `μ(f²) = 1`).
pub fn hwi_slack(mu: &WeightedMeasure1D, f: &[f64], mode: &HwiMode) -> Result<HwiReport> {
    let (entropy, energy) = entropy_and_energy(mu, f)?;
    let g = normalize(mu, f)?;
    let density: Vec<f64> = g.iter().map(|v| v * v).collect();
    let w2 = w2_1d(&density, mu)?;
    let (rhs, t_opt) = match mode {
        HwiMode::Theorem { eta, k } => {
            let (a, b) = schedule_integrals(eta, *k);
            let mut best = (f64::INFINITY, None);
            for i in 1..eta.times.len() {
                let v = 4.0 * a[i] * energy + w2 * w2 / (4.0 * b[i]);
                if v < best.0 {
                    best = (v, Some(eta.times[i]));
                }
            }
            best
        }
        HwiMode::Corollary { r, sigma, d, k, delta_r } => {
            if *sigma < 0.0 {
                return Err(Error::invalid(format!("sigma must be nonnegative, got {sigma}")));
            }
            if !(*r > 0.0) {
                return Err(Error::InvalidRadius { r: *r, max: f64::NAN });
            }
            let d = *d as f64;
            let kr = k + sigma * d / r + sigma * delta_r + 4.0 * sigma * sigma;
            let e = (2.0 * sigma * d / r).exp();
            (2.0 * e * energy.sqrt() * w2 + kr * e * w2 * w2 / 2.0, None)
        }
    };
    Ok(HwiReport { entropy, energy, w2, rhs, t_opt })
}

/// Terms of `μ(f² log f²) ≤ μ(P_t f² log P_t f²) + 4 μ(|∇f|²) ∫₀ᵗ e^{2Ks} η(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSobolevReport {
    pub entropy: f64,
    pub smoothed_entropy: f64,
    pub energy: f64,
    pub eta_integral: f64,
}

impl LogSobolevReport {
    pub fn rhs(&self) -> f64 {
        self.smoothed_entropy + 4.0 * self.energy * self.eta_integral
    }

    pub fn slack(&self) -> f64 {
        self.rhs() - self.entropy
    }
}

/// Slack of the semigroup log-Sobolev inequality at the last time of the
/// table, with `P_t f²` from the Neumann PDE reference on the grid of `μ`.
pub fn log_sobolev_34_slack(
    mu: &WeightedMeasure1D,
    drift: &DriftField,
    f: &[f64],
    k: f64,
    eta: &EtaTable,
) -> Result<LogSobolevReport> {
    let t = *eta.times.last().unwrap();
    let (entropy, energy) = entropy_and_energy(mu, f)?;
    let g = normalize(mu, f)?;
    let sq: Vec<f64> = g.iter().map(|v| v * v).collect();
    let (a, h) = (mu.nodes[0], mu.spacing());
    let lookup = |x: f64| {
        let i = ((x - a) / h).round().clamp(0.0, (sq.len() - 1) as f64) as usize;
        sq[i]
    };
    let q = vec![0.0; mu.domain.boundary_components()];
    let smoothed = solve_on_domain(&mu.domain, drift, &q, &lookup, t, mu.len(), 0.0)?;
    let ent: Vec<f64> = smoothed.values.iter().map(|v| xlogx(v.max(0.0))).collect();
    let (ai, _) = schedule_integrals(eta, k);
    Ok(LogSobolevReport {
        entropy,
        smoothed_entropy: mu.average(&ent),
        energy,
        eta_integral: *ai.last().unwrap(),
    })
}
