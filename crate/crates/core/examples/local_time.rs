//! Boundary local time of reflecting Brownian motion: the mean on the
//! half-line against its closed form for a ladder of step sizes, and the
//! exponential moments on an annulus against the closed-form envelope.

use robin_semigroup::cli::halfline_local_time_mean;
use robin_semigroup::geometry::{DomainModel, Point};
use robin_semigroup::inequalities::optimal_local_time_envelope;
use robin_semigroup::stochastics::{local_time_exp_moment_ladder, local_time_mean_ladder, DriftField, McParams, ReflectingDiffusion};

fn main() -> robin_semigroup::Result<()> {
    let half = DomainModel::HalfLine;
    let zero1 = DriftField::zero(1)?;
    let process = ReflectingDiffusion::new(&half, &zero1)?;
    let (x, t) = (0.0, 1.0);
    let exact = halfline_local_time_mean(x, t);
    println!("half-line, x = {x}, t = {t}: E l_t = {exact:.5}");
    println!("{:>10} {:>10} {:>10} {:>10}", "dt", "mean", "stderr", "error");
    let dts = [4e-3, 1e-3, 2.5e-4];
    for e in local_time_mean_ladder(&process, &Point::zeros(), t, &dts, 20_000, 7, None)? {
        println!("{:>10.1e} {:>10.5} {:>10.5} {:>10.5}", e.dt, e.mean, e.stderr, exact - e.mean);
    }

    let annulus = DomainModel::annulus(0.5, 1.5)?;
    let zero2 = DriftField::zero(2)?;
    let process = ReflectingDiffusion::new(&annulus, &zero2)?;
    let grid: Vec<Point> = [0.5, 0.75, 1.0, 1.25, 1.5].iter().map(|&r| Point::new(r, 0.0, 0.0)).collect();
    println!("\nannulus(0.5, 1.5): sup_x E e^(λ l_t) against the envelope");
    for lambda in [0.5, 1.0] {
        for r in local_time_exp_moment_ladder(&process, lambda, &[0.5, 1.0], &grid, &McParams::new(4000, 1e-3, 8))? {
            let env = optimal_local_time_envelope(lambda, r.t, &annulus, &zero2)?;
            println!(
                "λ = {lambda}, t = {}: {:.4} ± {:.4} at r = {} ≤ {:.4} (collar radius {:.3})",
                r.t, r.sup.mean, r.sup.stderr, grid[r.argmax][0], env.bound, env.r
            );
        }
    }
    Ok(())
}
