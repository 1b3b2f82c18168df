//! Gradient of the Neumann semigroup by the Bismut formula with the damped
//! transport, against the PDE gradient, and the curvature envelope of the
//! gradient on an annulus.

use std::f64::consts::PI;

use robin_semigroup::geometry::{DomainModel, Point};
use robin_semigroup::pde::{field_gradient, solve_on_domain};
use robin_semigroup::semigroup::{bismut_gradient_schedules, hsu_bound_rhs_mc, Schedule};
use robin_semigroup::stochastics::{DriftField, McParams, ReflectingDiffusion, TransportFlags};

fn main() -> robin_semigroup::Result<()> {
    // V = -x² on [0, 1]; f = cos πx.
    let dom = DomainModel::interval(1.0)?;
    let drift = DriftField::isotropic(-1.0, Point::zeros(), 1)?;
    let process = ReflectingDiffusion::new(&dom, &drift)?;
    let t = 0.2;
    let pde = solve_on_domain(&dom, &drift, &[0.0, 0.0], &|s| (PI * s).cos(), t, 401, 1.0)?;
    let f = |x: &Point| (PI * x[0]).cos();
    let schedules = [Schedule::Smoothstep, Schedule::Linear];
    // Missed boundary contacts kill the transport late: the estimate is
    // biased by O(√dt), a few percent at this step.
    let mc = McParams::new(10_000, 1e-4, 5);
    for x in [0.3, 0.5] {
        let est = bismut_gradient_schedules(&process, &f, &Point::new(x, 0.0, 0.0), t, &schedules, &mc, TransportFlags::default())?;
        let exact = field_gradient(&pde, x)?;
        for (s, e) in schedules.iter().zip(&est) {
            let c = e.component(0);
            println!("x = {x}, {:<10} {:>9.5} ± {:.5}   PDE {exact:>9.5}", s.name(), c.mean, c.stderr);
        }
    }

    // Annulus, f = cos π(r - 1/2): |∇P_t f| ≤ E[|∇f|(X_t) e^{2 l_t}].
    let annulus = DomainModel::annulus(0.5, 1.5)?;
    let zero = DriftField::zero(2)?;
    let process = ReflectingDiffusion::new(&annulus, &zero)?;
    let grad_norm = |x: &Point| (PI * (PI * (x.norm() - 0.5)).sin()).abs();
    let t = 0.1;
    let field = solve_on_domain(&annulus, &zero, &[0.0, 0.0], &|r| (PI * (r - 0.5)).cos(), t, 201, 1.5)?;
    println!();
    for r in [0.6, 1.0, 1.4] {
        let env = hsu_bound_rhs_mc(&process, &grad_norm, &|_| 0.0, &|_| 2.0, &Point::new(r, 0.0, 0.0), t, &McParams::new(2000, 1e-3, 6))?;
        println!("r = {r}: |∇P_t f| = {:.4} ≤ {:.4} ± {:.4}", field_gradient(&field, r)?.abs(), env.mean, env.stderr);
    }
    Ok(())
}
