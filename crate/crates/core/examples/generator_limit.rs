//! `(P_t f − f)/t → Lf` for a function in the Robin domain: a combination of
//! the two lowest Robin eigenfunctions of [0, 1] with Q = (0.5, -0.3).

use robin_semigroup::cli::{ObservableSpec, Profile};
use robin_semigroup::geometry::DomainModel;
use robin_semigroup::semigroup::{generator_residual, RobinCoefficient};
use robin_semigroup::stochastics::DriftField;

fn main() -> robin_semigroup::Result<()> {
    let dom = DomainModel::interval(1.0)?;
    let drift = DriftField::zero(1)?;
    let q = vec![0.5, -0.3];
    let f = Profile::new(&ObservableSpec::RobinModes { coefficients: vec![1.0, 0.3] }, &dom, &q)?;
    let points: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let times = [0.04, 0.02, 0.01, 0.005];
    let r = f.with_test_function(|tf| {
        generator_residual(&dom, &drift, tf, &RobinCoefficient::components(q.clone())?, &points, &times, 401)
    })?;
    for (t, sup) in r.times.iter().zip(&r.sup) {
        println!("t = {t:<6} sup |(P_t f − f)/t − Lf| = {sup:.4e}");
    }
    println!("fitted slope {:.3}, boundary defect {:.1e}", r.slope, r.boundary_defect);
    Ok(())
}
