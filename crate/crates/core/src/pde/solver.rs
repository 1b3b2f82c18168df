use crate::error::{Error, Result};
use crate::geometry::DomainModel;
use crate::numerics::solve_tridiagonal;
use crate::pde::field::{Geometry, GridField, SchemeMeta};

/// Smallest node count accepted by the solvers.
pub const MIN_NODES: usize = 16;

/// Number of Crank–Nicolson steps with `dt ≤ h²`.
pub fn auto_steps(t: f64, spacing: f64) -> usize {
    (t / (spacing * spacing)).ceil().max(1.0) as usize
}

/// A 1D weighted heat problem `w ∂_t u = ∂_x(W ∂_x u)` on `[a, b]` with
/// `W = J e^V` and Robin closures, discretized by vertex-centred finite
/// volumes. The boundary flux `-W u'` at an end with inward derivative
/// `∂_N u = -q u` becomes `W q u`, which turns the Robin condition into a
/// diagonal term; the resulting matrix is symmetric, so the scheme is
/// self-adjoint in the cell weights and conserves `Σ wᵢ uᵢ` when `q = 0`.
struct Problem<'a> {
    a: f64,
    b: f64,
    geometry: Geometry,
    potential: &'a dyn Fn(f64) -> f64,
    q_left: Option<f64>,
    q_right: Option<f64>,
}

fn check_inputs(n_nodes: usize, t: f64) -> Result<()> {
    if n_nodes < MIN_NODES {
        return Err(Error::invalid(format!("need at least {MIN_NODES} nodes, got {n_nodes}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

impl Problem<'_> {
    fn weight(&self, x: f64) -> f64 {
        self.geometry.jacobian(x) * (self.potential)(x).exp()
    }

    fn solve(&self, f0: &dyn Fn(f64) -> f64, n: usize, t: f64, n_steps: usize) -> Result<GridField> {
        check_inputs(n, t)?;
        for q in [self.q_left, self.q_right].into_iter().flatten() {
            if !q.is_finite() {
                return Err(Error::NonFinite(format!("Robin coefficient {q}")));
            }
        }
        let h = (self.b - self.a) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| self.a + i as f64 * h).collect();
        let n_steps = if n_steps == 0 { auto_steps(t, h) } else { n_steps };
        let dt = t / n_steps as f64;

        // Cell weights by Simpson's rule on each half cell.
        let half = |lo: f64, hi: f64| (hi - lo) / 6.0 * (self.weight(lo) + 4.0 * self.weight(0.5 * (lo + hi)) + self.weight(hi));
        let weights: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let left = if i > 0 { half(x - 0.5 * h, x) } else { 0.0 };
                let right = if i + 1 < n { half(x, x + 0.5 * h) } else { 0.0 };
                left + right
            })
            .collect();
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::NonFinite("cell weights".into()));
        }
        // Face conductances W(x_{i+1/2}) / h.
        let faces: Vec<f64> = (0..n - 1).map(|i| self.weight(nodes[i] + 0.5 * h) / h).collect();

        // Stiffness matrix A (symmetric tridiagonal): w du/dt = A u.
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n - 1 {
            diag[i] -= faces[i];
            diag[i + 1] -= faces[i];
            off[i] = faces[i];
        }
        if let Some(q) = self.q_left {
            diag[0] += self.weight(self.a) * q;
        }
        if let Some(q) = self.q_right {
            diag[n - 1] += self.weight(self.b) * q;
        }

        let mut u: Vec<f64> = nodes.iter().map(|&x| f0(x)).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial data".into()));
        }
        let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));

        let c = 0.5 * dt;
        let lower: Vec<f64> = std::iter::once(0.0).chain(off.iter().map(|o| -c * o)).collect();
        let upper: Vec<f64> = off.iter().map(|o| -c * o).chain(std::iter::once(0.0)).collect();
        let main: Vec<f64> = (0..n).map(|i| weights[i] - c * diag[i]).collect();
        let mut rhs = vec![0.0; n];
        for step in 0..n_steps {
            for i in 0..n {
                let mut v = (weights[i] + c * diag[i]) * u[i];
                if i > 0 {
                    v += c * off[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    v += c * off[i] * u[i + 1];
                }
                rhs[i] = v;
            }
            solve_tridiagonal(&lower, &main, &upper, &mut rhs);
            std::mem::swap(&mut u, &mut rhs);
            if step % 64 == 0 || step + 1 == n_steps {
                let bad = u.iter().any(|v| !v.is_finite() || v.abs() > 1e12 * scale);
                if bad {
                    return Err(Error::Instability(format!(
                        "solution blew up at step {step} (dt = {dt:.3e}, h = {h:.3e})"
                    )));
                }
            }
        }
        Ok(GridField {
            nodes,
            values: u,
            time: t,
            weights,
            meta: SchemeMeta {
                spacing: h,
                dt,
                n_steps,
                geometry: self.geometry,
                boundary_order: 2,
                q_left: self.q_left,
                q_right: self.q_right,
            },
        })
    }
}

/// `∂_t u = u'' + V' u'` on `[0, length]` with `u'(0) = -q₀ u(0)` and
/// `u'(L) = q_L u(L)` (the Robin condition `<N, ∇u> + Q u = 0` with the
/// inward normal). `n_steps = 0` picks `dt ≤ h²`.
pub fn solve_robin_heat_1d(
    potential: &dyn Fn(f64) -> f64,
    q: (f64, f64),
    f0: &dyn Fn(f64) -> f64,
    length: f64,
    n_nodes: usize,
    t: f64,
    n_steps: usize,
) -> Result<GridField> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(format!("length must be positive, got {length}")));
    }
    Problem { a: 0.0, b: length, geometry: Geometry::Line, potential, q_left: Some(q.0), q_right: Some(q.1) }
        .solve(f0, n_nodes, t, n_steps)
}

/// Radial problem `∂_t u = u'' + ((d-1)/r + V') u'` on a ball (regular
/// center) or annulus. `q` holds one coefficient per boundary component:
/// `[q_outer]` for the ball, `[q_inner, q_outer]` for the annulus.
pub fn solve_robin_heat_radial(
    domain: &DomainModel,
    potential: &dyn Fn(f64) -> f64,
    q: &[f64],
    f0: &dyn Fn(f64) -> f64,
    n_nodes: usize,
    t: f64,
    n_steps: usize,
) -> Result<GridField> {
    domain.validate()?;
    let (a, b, dim, q_left, q_right) = match *domain {
        DomainModel::Ball { radius, dim } => {
            if q.len() != 1 {
                return Err(Error::invalid(format!("ball needs one Robin coefficient, got {}", q.len())));
            }
            (0.0, radius, dim, None, Some(q[0]))
        }
        DomainModel::Annulus { r_in, r_out } => {
            if q.len() != 2 {
                return Err(Error::invalid(format!("annulus needs two Robin coefficients, got {}", q.len())));
            }
            (r_in, r_out, 2, Some(q[0]), Some(q[1]))
        }
        _ => return Err(Error::invalid("radial solver needs a ball or an annulus")),
    };
    Problem { a, b, geometry: Geometry::Radial { dim }, potential, q_left, q_right }.solve(f0, n_nodes, t, n_steps)
}

/// Truncation length used for the half-line: Gaussian reach `8√(2t)` plus
/// the distance the drift can carry mass in time `t`.
pub fn half_line_truncation(x_max: f64, t: f64, drift_bound: f64) -> f64 {
    x_max + 8.0 * (2.0 * t).sqrt() + 2.0 * drift_bound.abs() * t + 1.0
}

/// Half-line problem truncated at [`half_line_truncation`] with a Neumann
/// far end; `x_max` is the largest coordinate that will be evaluated and
/// `drift_bound` bounds `|V'|` on the truncated interval.
#[allow(clippy::too_many_arguments)]
pub fn solve_robin_heat_halfline(
    potential: &dyn Fn(f64) -> f64,
    q: f64,
    f0: &dyn Fn(f64) -> f64,
    x_max: f64,
    drift_bound: f64,
    n_nodes: usize,
    t: f64,
    n_steps: usize,
) -> Result<GridField> {
    let length = half_line_truncation(x_max, t, drift_bound);
    solve_robin_heat_1d(potential, (q, 0.0), f0, length, n_nodes, t, n_steps)
}

/// Largest nodal difference between a solve on `n` nodes and one on
/// `2n - 1` nodes (the coarse nodes are every other fine node).
pub fn richardson_difference(coarse: &GridField, fine: &GridField) -> Result<f64> {
    if fine.len() != 2 * coarse.len() - 1 {
        return Err(Error::invalid("fine grid must have 2n - 1 nodes"));
    }
    Ok(coarse
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - fine.values[2 * i]).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fit_slope;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn zero(_: f64) -> f64 {
        0.0
    }

    #[test]
    fn neumann_preserves_constants() {
        let g = solve_robin_heat_1d(&|x: f64| -x * x, (0.0, 0.0), &|_| 2.5, 1.0, 33, 0.3, 0).unwrap();
        assert!(g.values.iter().all(|v| (*v - 2.5).abs() < 1e-13));
        let ann = DomainModel::annulus(0.5, 1.5).unwrap();
        let g = solve_robin_heat_radial(&ann, &zero, &[0.0, 0.0], &|_| 1.5, 33, 0.3, 0).unwrap();
        assert!(g.values.iter().all(|v| (*v - 1.5).abs() < 1e-14));
    }

    #[test]
    fn mass_is_conserved_per_step() {
        let f0 = |x: f64| (3.0 * x).cos() + 2.0;
        let mut prev: Option<f64> = None;
        for steps in 1..=5 {
            let g = solve_robin_heat_1d(&zero, (0.0, 0.0), &f0, 1.0, 41, 0.01 * steps as f64, steps).unwrap();
            let mass: f64 = g.weights.iter().zip(&g.values).map(|(w, v)| w * v).sum();
            if let Some(p) = prev {
                assert!((mass - p).abs() < 1e-10);
            }
            prev = Some(mass);
        }
    }

    #[test]
    fn neumann_cosine_decays_exactly() {
        // u = e^{-π² t} cos(π x) solves the V = 0 Neumann problem.
        let g = solve_robin_heat_1d(&zero, (0.0, 0.0), &|x: f64| (PI * x).cos(), 1.0, 201, 0.1, 0).unwrap();
        for (x, v) in g.nodes.iter().zip(&g.values) {
            assert_abs_diff_eq!(*v, (-PI * PI * 0.1).exp() * (PI * x).cos(), epsilon = 2e-5);
        }
    }

    #[test]
    fn robin_eigenfunction_decays_at_its_rate() {
        // u = cos(k x) - (q/k) sin(k x) satisfies u'(0) = -q u(0); choosing
        // the right coefficient from u'(1) = q_L u(1) makes it an eigenfunction.
        let (q0, k) = (0.5, 2.0f64);
        let u = |x: f64| (k * x).cos() - q0 / k * (k * x).sin();
        let du = |x: f64| -k * (k * x).sin() - q0 * (k * x).cos();
        let q1 = du(1.0) / u(1.0);
        let t = 0.05;
        let g = solve_robin_heat_1d(&zero, (q0, q1), &u, 1.0, 401, t, 0).unwrap();
        for (x, v) in g.nodes.iter().zip(&g.values).step_by(20) {
            assert_abs_diff_eq!(*v, (-k * k * t).exp() * u(*x), epsilon = 1e-5);
        }
    }

    #[test]
    fn radial_ball_eigenfunction() {
        // In 3D, sin(k r)/r with tan(k R) = k R is a Neumann eigenfunction; use
        // the first root k R ≈ 4.493409457909064.
        let k = 4.493_409_457_909_064f64;
        let f = |r: f64| if r == 0.0 { k } else { (k * r).sin() / r };
        let ball = DomainModel::ball(1.0, 3).unwrap();
        let t = 0.02;
        let g = solve_robin_heat_radial(&ball, &zero, &[0.0], &f, 401, t, 0).unwrap();
        for (r, v) in g.nodes.iter().zip(&g.values).step_by(40) {
            assert_abs_diff_eq!(*v, (-k * k * t).exp() * f(*r), epsilon = 2e-4 * k);
        }
        assert!(field_gradient_at_origin(&g).abs() < 1e-3);
    }

    fn field_gradient_at_origin(g: &GridField) -> f64 {
        crate::pde::field_gradient(g, 0.0).unwrap()
    }

    #[test]
    fn second_order_self_convergence() {
        let f0 = |x: f64| (PI * x).cos();
        let v = |x: f64| -x * x;
        let mut diffs = Vec::new();
        let mut hs = Vec::new();
        for n in [41, 81, 161] {
            let c = solve_robin_heat_1d(&v, (0.5, -0.3), &f0, 1.0, n, 0.25, 0).unwrap();
            let fi = solve_robin_heat_1d(&v, (0.5, -0.3), &f0, 1.0, 2 * n - 1, 0.25, 0).unwrap();
            diffs.push(richardson_difference(&c, &fi).unwrap().ln());
            hs.push(c.spacing().ln());
        }
        let order = fit_slope(&hs, &diffs);
        assert!((order - 2.0).abs() <= 0.2, "order {order}");
    }

    #[test]
    fn sub_markovian_contraction() {
        let f0 = |x: f64| 1.0 + (5.0 * x).sin().abs();
        let g = solve_robin_heat_1d(&|x: f64| x, (-0.7, -0.2), &f0, 1.0, 65, 0.5, 0).unwrap();
        let sup0 = (0..65).map(|i| f0(i as f64 / 64.0)).fold(0.0, f64::max);
        assert!(g.values.iter().all(|v| *v >= -1e-12 && *v <= sup0));
    }

    #[test]
    fn half_line_truncation_is_negligible() {
        let f0 = |x: f64| (-x).exp();
        let a = solve_robin_heat_halfline(&zero, 0.4, &f0, 1.0, 0.0, 401, 0.3, 0).unwrap();
        let l = a.nodes.last().unwrap() * 2.0;
        let b = solve_robin_heat_1d(&zero, (0.4, 0.0), &f0, l, 801, 0.3, 0).unwrap();
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert!((a.value_at(x).unwrap() - b.value_at(x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_robin_heat_1d(&zero, (0.0, 0.0), &|_| 1.0, 1.0, 8, 0.1, 0).is_err());
        assert!(solve_robin_heat_1d(&zero, (0.0, 0.0), &|_| 1.0, 1.0, 32, 0.0, 0).is_err());
        let ball = DomainModel::ball(1.0, 2).unwrap();
        assert!(solve_robin_heat_radial(&ball, &zero, &[0.0, 1.0], &|_| 1.0, 32, 0.1, 0).is_err());
        assert!(solve_robin_heat_radial(&DomainModel::HalfLine, &zero, &[0.0], &|_| 1.0, 32, 0.1, 0).is_err());
    }
}
