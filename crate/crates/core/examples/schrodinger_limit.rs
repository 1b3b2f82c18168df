//! Interior potentials approximating the Robin boundary weight: the
//! Schrödinger semigroups for growing n against the Robin semigroup, on
//! common paths.

use std::f64::consts::PI;

use robin_semigroup::geometry::{DomainModel, Point};
use robin_semigroup::semigroup::{build_schrodinger_extension, schrodinger_pt_mc, RobinCoefficient};
use robin_semigroup::stochastics::{DriftField, McParams, ReflectingDiffusion};

fn main() -> robin_semigroup::Result<()> {
    let dom = DomainModel::interval(1.0)?;
    let drift = DriftField::zero(1)?;
    let process = ReflectingDiffusion::new(&dom, &drift)?;
    let q = RobinCoefficient::components(vec![0.5, -0.3])?;
    let f = |x: &Point| (PI * x[0]).cos();
    let x = Point::new(0.5, 0.0, 0.0);
    let mc = McParams::new(4000, 2.5e-4, 71);
    println!("{:>4} {:>10} {:>10} {:>10} {:>10}", "n", "raw", "corrected", "robin", "|raw-robin|");
    for n in [4.0, 8.0, 16.0, 32.0] {
        let ext = build_schrodinger_extension(&dom, &drift, &q, 0.5, n)?;
        let r = schrodinger_pt_mc(&process, &f, &ext, &x, 0.25, &mc)?;
        println!(
            "{n:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.5} ± {:.5}",
            r.raw.mean,
            r.corrected.mean,
            r.robin.mean,
            r.raw_residual(),
            r.raw_paired_stderr
        );
    }
    Ok(())
}
