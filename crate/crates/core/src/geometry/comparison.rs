use crate::error::{Error, Result};
use crate::geometry::CurvatureData;
use crate::numerics::{adaptive_simpson, hermite};

/// Number of nodes of the ψ table.
pub const PROFILE_NODES: usize = 10_000;

/// The comparison function `h(s) = cos(√k s) - (γ/√k) sin(√k s)` and its
/// first two derivatives; `k = 0` uses the limit `h = 1 - γ s`.
pub fn comparison_h(k: f64, gamma: f64, s: f64) -> (f64, f64, f64) {
    if k == 0.0 {
        return (1.0 - gamma * s, -gamma, 0.0);
    }
    let sk = k.sqrt();
    let (sn, cs) = (sk * s).sin_cos();
    let h = cs - gamma / sk * sn;
    let dh = -sk * sn - gamma * cs;
    (h, dh, -k * h)
}

/// Largest radius on which `h > 0`: `(1/√k) arcsin(√k/√(k+γ²))`, with the
/// limits `1/γ` (k = 0) and `π/(2√k)` (γ = 0).
pub fn curvature_cap(k: f64, gamma: f64) -> f64 {
    if k == 0.0 {
        if gamma == 0.0 {
            f64::INFINITY
        } else {
            1.0 / gamma
        }
    } else {
        (k.sqrt() / (k + gamma * gamma).sqrt()).asin() / k.sqrt()
    }
}

fn check_curvature(k: f64, gamma: f64) -> Result<()> {
    if !(k.is_finite() && gamma.is_finite()) {
        return Err(Error::NonFinite(format!("k = {k}, gamma = {gamma}")));
    }
    if k < 0.0 {
        return Err(Error::invalid(format!("k must be nonnegative, got {k}")));
    }
    if gamma < 0.0 {
        return Err(Error::invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    Ok(())
}

/// `min(i_∂M, r0, curvature cap)`.
pub fn r_admissible(curv: &CurvatureData, r0: f64) -> Result<f64> {
    if !r0.is_finite() {
        return Err(Error::NonFinite(format!("r0 = {r0}")));
    }
    if r0 <= 0.0 {
        return Err(Error::invalid(format!("r0 must be positive, got {r0}")));
    }
    check_curvature(curv.k, curv.gamma)?;
    if curv.inj_boundary.is_nan() || curv.inj_boundary <= 0.0 {
        return Err(Error::invalid(format!("inj_boundary = {}", curv.inj_boundary)));
    }
    Ok(curv.inj_boundary.min(r0).min(curvature_cap(curv.k, curv.gamma)))
}

/// Comparison profile of radius `r`: `h`, the constant
/// `α = (1 - h(r))^{1-d} ∫₀ʳ (h(s) - h(r))^{d-1} ds`, and the tabulated
/// function `ψ(s) = ∫₀^{s∧r} ψ'`, `ψ'(t) = α⁻¹ D(t)^{1-d} ∫ₜʳ D^{d-1}` with
/// `D = h - h(r)`. `ψ` solves `ψ'' = (1-d) h'/D ψ' - 1/α` on `[0, r)`, has
/// `ψ'(0) = 1`, and is constant beyond `r`.
#[derive(Debug, Clone)]
pub struct ComparisonProfile {
    r: f64,
    d: usize,
    k: f64,
    gamma: f64,
    alpha: f64,
    spacing: f64,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
}

impl ComparisonProfile {
    pub fn new(r: f64, k: f64, gamma: f64, d: usize) -> Result<Self> {
        check_curvature(k, gamma)?;
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::invalid(format!("radius must be positive and finite, got {r}")));
        }
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let cap = curvature_cap(k, gamma);
        if r > cap * (1.0 + 1e-12) {
            return Err(Error::InvalidRadius { r, max: cap });
        }
        let n = PROFILE_NODES;
        let spacing = r / (n - 1) as f64;
        let nodes = (0..n).map(|i| i as f64 * spacing);

        // With k = 0 (any γ) or d = 1 the integrals are elementary:
        // α = r/d and ψ(s) = s - s²/(2r).
        if k == 0.0 || d == 1 {
            let alpha = r / d as f64;
            let (psi, dpsi) = nodes.map(|s| (s - s * s / (2.0 * r), 1.0 - s / r)).unzip();
            return Ok(ComparisonProfile { r, d, k, gamma, alpha, spacing, psi, dpsi });
        }

        let hr = comparison_h(k, gamma, r).0;
        let pw = (d - 1) as i32;
        let big_d = |s: f64| (comparison_h(k, gamma, s).0 - hr).max(0.0);
        let integrand = |s: f64| big_d(s).powi(pw);
        let alpha = (1.0 - hr).powi(1 - d as i32) * adaptive_simpson(integrand, 0.0, r, 1e-12);

        // tail[i] = ∫_{s_i}^r D^{d-1}, Simpson per subinterval.
        let mut tail = vec![0.0; n];
        for i in (0..n - 1).rev() {
            let a = i as f64 * spacing;
            let b = a + spacing;
            tail[i] = tail[i + 1]
                + spacing / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
        }
        let mut dpsi = vec![0.0; n];
        for i in 0..n - 1 {
            let s = i as f64 * spacing;
            dpsi[i] = big_d(s).powi(1 - d as i32) * tail[i] / alpha;
        }
        let mut psi = vec![0.0; n];
        for i in 1..n {
            psi[i] = psi[i - 1] + 0.5 * spacing * (dpsi[i - 1] + dpsi[i]);
        }
        Ok(ComparisonProfile { r, d, k, gamma, alpha, spacing, psi, dpsi })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self, s: f64) -> f64 {
        comparison_h(self.k, self.gamma, s).0
    }

    pub fn h_prime(&self, s: f64) -> f64 {
        comparison_h(self.k, self.gamma, s).1
    }

    pub fn psi_prime_at_zero(&self) -> f64 {
        self.dpsi[0]
    }

    /// `ψ(∞) = ψ(r)`.
    pub fn psi_max(&self) -> f64 {
        *self.psi.last().unwrap()
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let x = s / self.spacing;
        let i = (x.floor() as usize).min(self.psi.len() - 2);
        (i, x - i as f64)
    }

    pub fn psi(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.r {
            return self.psi_max();
        }
        let (i, tau) = self.locate(s);
        hermite(self.psi[i], self.psi[i + 1], self.dpsi[i], self.dpsi[i + 1], self.spacing, tau)
    }

    pub fn psi_prime(&self, s: f64) -> f64 {
        if s >= self.r {
            return 0.0;
        }
        let s = s.max(0.0);
        let (i, tau) = self.locate(s);
        self.dpsi[i] + tau * (self.dpsi[i + 1] - self.dpsi[i])
    }

    pub fn psi_second(&self, s: f64) -> f64 {
        if s >= self.r {
            return 0.0;
        }
        let limit = -1.0 / (self.d as f64 * self.alpha);
        if self.k == 0.0 || self.d == 1 {
            return limit;
        }
        // The ratio h'/D is singular at r; its product with ψ' has the finite
        // limit -1/(dα), which is used on the last two table cells.
        if self.r - s < 2.0 * self.spacing {
            return limit;
        }
        let (h, dh, _) = comparison_h(self.k, self.gamma, s);
        let dd = h - comparison_h(self.k, self.gamma, self.r).0;
        (1.0 - self.d as f64) * dh / dd * self.psi_prime(s) - 1.0 / self.alpha
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.psi.len()).map(move |i| i as f64 * self.spacing)
    }
}
