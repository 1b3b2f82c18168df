use std::f64::consts::PI;

use crate::cli::config::ObservableSpec;
use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::pde::grid_coordinate;
use crate::semigroup::plateau::smooth_step;
use crate::semigroup::TestFunction;

/// An observable resolved against its domain: closed-form value and first
/// two derivatives in the grid coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    Cosine { k: f64, shift: f64 },
    Gaussian { center: f64, width: f64 },
    /// `(1 − S) e^{−q_a (s − a)} + S e^{q_b (s − b)}` with `S` a smooth step
    /// on `[lo, hi]`; each exponential satisfies the Robin condition at its end.
    RobinBlend { a: f64, b: f64, qa: f64, qb: f64, lo: f64, hi: f64 },
    /// `Σ c u_λ` over `(λ, c)` where `u_λ'' = −λ u_λ`, `u_λ(0) = 1` and
    /// `u_λ'(0) = −q u_λ(0)`: `cos ωs − (q/ω) sin ωs` for `λ = ω² > 0`,
    /// `cosh κs − (q/κ) sinh κs` for `λ = −κ² < 0`, and `1 − q s` for `λ = 0`.
    RobinModes { q: f64, modes: Vec<(f64, f64)> },
}

fn bisect(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            (a, ga) = (m, gm);
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b {
            break;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `g` on `(lo, hi]`, scanned with `steps` cells and refined
/// by bisection, in increasing order.
fn roots(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    let (mut a, mut ga) = (lo, g(lo));
    for i in 1..=steps {
        let b = lo + h * i as f64;
        let gb = g(b);
        if gb != 0.0 && ga.signum() != gb.signum() {
            out.push(bisect(g, a, b));
        }
        (a, ga) = (b, gb);
    }
    out
}

/// The `count` smallest Robin eigenvalues `λ` of `−d²/ds²` on `[0, length]`
/// with `u'(0) + q0 u(0) = 0` and `−u'(L) + q1 u(L) = 0`, in increasing
/// order. Positive coefficients lower the energy, so they can produce
/// negative eigenvalues.
pub fn robin_eigenvalues(q0: f64, q1: f64, length: f64, count: usize) -> Vec<f64> {
    let at_zero = q0 * q1 * length - (q0 + q1);
    // Right-end condition divided by the frequency; both branches tend to
    // `at_zero` as the frequency goes to zero.
    let trig = |w: f64| -(w - q0 * q1 / w) * (w * length).sin() - (q0 + q1) * (w * length).cos();
    let hyp = |k: f64| (k + q0 * q1 / k) * (k * length).tanh() - (q0 + q1);
    let eps = 1e-7 / length;
    let k_max = 2.0 * (q0.abs() + q1.abs()) + 1.0 / length;
    let mut out: Vec<f64> =
        roots(&hyp, eps, k_max, 4096).into_iter().rev().map(|k| -k * k).collect();
    if at_zero.abs() < 1e-14 {
        out.push(0.0);
    }
    let step = PI / (64.0 * length);
    let mut lo = eps;
    while out.len() < count {
        out.extend(roots(&trig, lo, lo + 64.0 * step, 64).into_iter().map(|w| w * w));
        lo += 64.0 * step;
    }
    out.truncate(count);
    out
}

impl Profile {
    pub fn new(spec: &ObservableSpec, domain: &DomainModel, q: &[f64]) -> Result<Self> {
        Ok(match *spec {
            ObservableSpec::Constant { value } => Profile::Constant(value),
            ObservableSpec::Cosine { k, shift } => Profile::Cosine { k, shift },
            ObservableSpec::RobinModes { ref coefficients } => {
                let DomainModel::Interval { length } = *domain else {
                    return Err(Error::Config("robin_modes is only available on the interval".into()));
                };
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Config("robin_modes needs finite coefficients".into()));
                }
                let eig = robin_eigenvalues(q[0], q[1], length, coefficients.len());
                Profile::RobinModes { q: q[0], modes: eig.into_iter().zip(coefficients.iter().cloned()).collect() }
            }
            ObservableSpec::Gaussian { center, width } => {
                if !(width > 0.0) {
                    return Err(Error::Config(format!("gaussian width must be positive, got {width}")));
                }
                Profile::Gaussian { center, width }
            }
            ObservableSpec::RobinBlend { from, to } => {
                if !(0.0 <= from && from < to && to <= 1.0) {
                    return Err(Error::Config(format!("robin_blend needs 0 <= from < to <= 1, got {from}, {to}")));
                }
                // The left end of a ball is its centre, where f' = 0 is needed.
                let (a, b, qa, qb) = match *domain {
                    DomainModel::HalfLine => (0.0, 1.0, q[0], 0.0),
                    DomainModel::Interval { length } => (0.0, length, q[0], q[1]),
                    DomainModel::Ball { radius, .. } => (0.0, radius, 0.0, q[0]),
                    DomainModel::Annulus { r_in, r_out } => (r_in, r_out, q[0], q[1]),
                };
                let (lo, hi) = (a + from * (b - a), a + to * (b - a));
                if matches!(domain, DomainModel::HalfLine) {
                    // Only one end: keep the left exponential everywhere.
                    Profile::RobinBlend { a, b, qa, qb, lo: f64::INFINITY, hi: f64::INFINITY }
                } else {
                    Profile::RobinBlend { a, b, qa, qb, lo, hi }
                }
            }
        })
    }

    pub fn value(&self, s: f64) -> f64 {
        self.jet(s).0
    }

    pub fn first(&self, s: f64) -> f64 {
        self.jet(s).1
    }

    pub fn second(&self, s: f64) -> f64 {
        self.jet(s).2
    }

    /// `(f, f', f'')` at coordinate `s`.
    pub fn jet(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Constant(c) => (c, 0.0, 0.0),
            Profile::Cosine { k, shift } => {
                let w = k * PI;
                let (sin, cos) = (w * (s - shift)).sin_cos();
                (cos, -w * sin, -w * w * cos)
            }
            Profile::Gaussian { center, width } => {
                let u = (s - center) / width;
                let g = (-0.5 * u * u).exp();
                (g, -u / width * g, (u * u - 1.0) / (width * width) * g)
            }
            Profile::RobinModes { q, ref modes } => modes.iter().fold((0.0, 0.0, 0.0), |acc, &(lambda, c)| {
                let (u, du) = if lambda > 0.0 {
                    let w = lambda.sqrt();
                    let (sin, cos) = (w * s).sin_cos();
                    (cos - q / w * sin, -w * sin - q * cos)
                } else if lambda < 0.0 {
                    let k = (-lambda).sqrt();
                    let (sinh, cosh) = ((k * s).sinh(), (k * s).cosh());
                    (cosh - q / k * sinh, k * sinh - q * cosh)
                } else {
                    (1.0 - q * s, -q)
                };
                (acc.0 + c * u, acc.1 + c * du, acc.2 - c * lambda * u)
            }),
            Profile::RobinBlend { a, b, qa, qb, lo, hi } => {
                let ea = (-qa * (s - a)).exp();
                let (fa, fa1, fa2) = (ea, -qa * ea, qa * qa * ea);
                if !lo.is_finite() {
                    return (fa, fa1, fa2);
                }
                let eb = (qb * (s - b)).exp();
                let (fb, fb1, fb2) = (eb, qb * eb, qb * qb * eb);
                let (st, st1, st2) = smooth_step(s, lo, hi);
                (
                    fa + st * (fb - fa),
                    fa1 + st1 * (fb - fa) + st * (fb1 - fa1),
                    fa2 + st2 * (fb - fa) + 2.0 * st1 * (fb1 - fa1) + st * (fb2 - fa2),
                )
            }
        }
    }

    /// Borrowed view as a [`TestFunction`].
    pub fn with_test_function<T>(&self, body: impl FnOnce(&TestFunction<'_>) -> T) -> T {
        let value = |s: f64| self.value(s);
        let first = |s: f64| self.first(s);
        let second = |s: f64| self.second(s);
        body(&TestFunction { value: &value, first: &first, second: &second })
    }

    /// The observable as a function on the domain.
    pub fn on_domain<'a>(&'a self, domain: &'a DomainModel) -> impl Fn(&Point) -> f64 + Sync + 'a {
        move |x: &Point| self.value(grid_coordinate(domain, x))
    }

    /// `|∇f|` on the domain.
    pub fn gradient_norm_on_domain<'a>(&'a self, domain: &'a DomainModel) -> impl Fn(&Point) -> f64 + Sync + 'a {
        move |x: &Point| self.first(grid_coordinate(domain, x)).abs()
    }

    /// Largest of `|f|` over `samples` uniform coordinates of `[a, b]`.
    pub fn sup_norm(&self, a: f64, b: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.value(a + (b - a) * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }
}
