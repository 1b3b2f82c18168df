//! Geometry of the boundary collar: curvature data of the model domains,
//! the Laplacian comparison bounds on `Lρ`, and the comparison profile `ψ`
//! used to reconstruct the local time.

use robin_semigroup::geometry::{laplacian_rho_check, ComparisonProfile, DomainModel, Point};
use robin_semigroup::stochastics::DriftField;

fn main() -> robin_semigroup::Result<()> {
    let domains = [
        DomainModel::half_line(),
        DomainModel::interval(1.0)?,
        DomainModel::ball(1.0, 3)?,
        DomainModel::annulus(0.5, 1.5)?,
    ];
    for d in &domains {
        let c = d.curvature_data();
        println!("{:<9} σ = {:<6} γ = {:<9.4} collar width = {}", d.name(), c.sigma, c.gamma, c.inj_boundary);
    }

    let annulus = DomainModel::annulus(0.5, 1.5)?;
    let drift = DriftField::isotropic(-0.2, Point::zeros(), 2)?;
    println!("\nLρ on the annulus with V = -0.2|x|², collar radius 0.4:");
    for r in [0.55, 0.7, 0.85, 1.2, 1.4] {
        let c = laplacian_rho_check(&annulus, &drift, &Point::new(r, 0.0, 0.0), 0.4)?;
        println!("r = {r:<5} {:>8.4} ≤ {:>8.4} ≤ {:>8.4}", c.lower_bound, c.exact, c.upper_bound);
    }

    let cd = annulus.curvature_data();
    let profile = ComparisonProfile::new(0.4, cd.k, cd.gamma, 2)?;
    println!("\nψ on [0, 0.4]: ψ'(0) = {:.4}, sup ψ = {:.4}", profile.psi_prime_at_zero(), profile.psi_max());
    for s in [0.0, 0.1, 0.2, 0.3, 0.4] {
        println!("s = {s:<4} ψ = {:.5}  ψ' = {:.5}  ψ'' = {:.5}", profile.psi(s), profile.psi_prime(s), profile.psi_second(s));
    }
    Ok(())
}
