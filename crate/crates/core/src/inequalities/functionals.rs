use crate::error::{Error, Result};
use crate::inequalities::measure::WeightedMeasure1D;

/// `s log s` with `0 log 0 = 0`.
pub fn xlogx(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s * s.ln()
    }
}

/// `f / √(μ̂(f²))` for the normalized measure `μ̂ = μ / μ(M)`.
pub fn normalize(mu: &WeightedMeasure1D, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != mu.len() {
        return Err(Error::invalid(format!("grid function has {} values, measure has {} nodes", f.len(), mu.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("grid function".into()));
    }
    let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
    let norm = mu.average(&sq);
    if !(norm > 0.0) {
        return Err(Error::invalid("f vanishes identically"));
    }
    let c = norm.sqrt();
    Ok(f.iter().map(|v| v / c).collect())
}

/// `(μ̂(f² log f²), μ̂(|f'|²))` after normalizing `μ̂(f²) = 1`.
pub fn entropy_and_energy(mu: &WeightedMeasure1D, f: &[f64]) -> Result<(f64, f64)> {
    let g = normalize(mu, f)?;
    let ent: Vec<f64> = g.iter().map(|v| xlogx(v * v)).collect();
    let dg = mu.derivative(&g);
    let en: Vec<f64> = dg.iter().map(|d| d * d).collect();
    Ok((mu.average(&ent), mu.average(&en)))
}

/// Quantile function of a piecewise-uniform distribution: cumulative
/// masses and the coordinate reached at each, as matching breakpoints.
fn quantile_breakpoints(nodes: &[f64], density: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let cells: Vec<f64> = nodes
        .windows(2)
        .zip(density.windows(2))
        .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] + p[1]))
        .collect();
    let total: f64 = cells.iter().sum();
    if !(total.is_finite() && total > 0.0) || density.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::invalid("density must be nonnegative, finite and normalizable"));
    }
    let mut u: Vec<f64> = Vec::with_capacity(cells.len() + 1);
    let mut x: Vec<f64> = Vec::with_capacity(cells.len() + 1);
    let mut acc = 0.0;
    for (i, m) in cells.iter().enumerate() {
        if *m <= 0.0 {
            continue;
        }
        // A gap in the support becomes a jump of the quantile function.
        if x.last() != Some(&nodes[i]) {
            u.push(acc);
            x.push(nodes[i]);
        }
        acc += m / total;
        u.push(acc);
        x.push(nodes[i + 1]);
    }
    *u.last_mut().unwrap() = 1.0;
    Ok((u, x))
}

fn quantile_at(u: &[f64], x: &[f64], s: f64, hint: &mut usize) -> f64 {
    while *hint + 2 < u.len() && u[*hint + 1] < s {
        *hint += 1;
    }
    let (u0, u1) = (u[*hint], u[*hint + 1]);
    if u1 <= u0 {
        return x[*hint + 1];
    }
    x[*hint] + (x[*hint + 1] - x[*hint]) * ((s - u0) / (u1 - u0)).clamp(0.0, 1.0)
}

/// `W₂` between two Lebesgue densities on one uniform grid (each treated as
/// piecewise uniform on the cells), by the monotone quantile coupling.
/// Between merged breakpoints both quantile functions are affine, so the
/// integral is evaluated exactly.
pub fn w2_densities(nodes: &[f64], p: &[f64], q: &[f64]) -> Result<f64> {
    if nodes.len() < 2 || p.len() != nodes.len() || q.len() != nodes.len() {
        return Err(Error::invalid("densities must match the grid"));
    }
    let (up, xp) = quantile_breakpoints(nodes, p)?;
    let (uq, xq) = quantile_breakpoints(nodes, q)?;
    let mut breaks: Vec<f64> = up.iter().chain(&uq).cloned().collect();
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let (mut hp, mut hq) = (0, 0);
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        // Evaluate just inside the piece so jumps are taken from the right side.
        let eps = 1e-15 * (b - a);
        let d0 = quantile_at(&up, &xp, a + eps, &mut hp) - quantile_at(&uq, &xq, a + eps, &mut hq);
        let d1 = quantile_at(&up, &xp, b - eps, &mut hp) - quantile_at(&uq, &xq, b - eps, &mut hq);
        sum += (b - a) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    Ok(sum.max(0.0).sqrt())
}

/// `W₂(ν, μ)` for `ν = ρ μ`, with `ρ` given on the grid of `μ`. On balls
/// and annuli this is the distance between radial marginals, which equals
/// the full distance for radial measures.
pub fn w2_1d(nu_relative: &[f64], mu: &WeightedMeasure1D) -> Result<f64> {
    if nu_relative.len() != mu.len() {
        return Err(Error::invalid("density must match the measure grid"));
    }
    let base = mu.density();
    let nu: Vec<f64> = base.iter().zip(nu_relative).map(|(b, r)| b * r).collect();
    w2_densities(&mu.nodes, &nu, &base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainModel;
    use crate::numerics::adaptive_simpson;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn uniform(n: usize) -> WeightedMeasure1D {
        WeightedMeasure1D::with_potential(&DomainModel::interval(1.0).unwrap(), &|_| 0.0, &|_| 0.0, n, true).unwrap()
    }

    #[test]
    fn constants_have_no_entropy_or_energy() {
        let mu = uniform(101);
        let (e, i) = entropy_and_energy(&mu, &vec![3.0; 101]).unwrap();
        assert!(e.abs() < 1e-14 && i.abs() < 1e-20);
        assert!(entropy_and_energy(&mu, &vec![0.0; 101]).is_err());
    }

    #[test]
    fn entropy_matches_quadrature_oracle() {
        let mu = uniform(2001);
        let f2 = |x: f64| (1.0 + 0.5 * (PI * x).cos()) / 1.0;
        let f: Vec<f64> = mu.nodes.iter().map(|&x| f2(x).sqrt()).collect();
        let (e, _) = entropy_and_energy(&mu, &f).unwrap();
        let oracle = adaptive_simpson(|x| f2(x) * f2(x).ln(), 0.0, 1.0, 1e-13);
        assert!((e - oracle).abs() < 1e-6, "{e} vs {oracle}");
    }

    #[test]
    fn translated_densities_are_shifted_exactly() {
        let n = 2001;
        let nodes: Vec<f64> = (0..n).map(|i| -10.0 + 20.0 * i as f64 / (n - 1) as f64).collect();
        let g = |m: f64| nodes.iter().map(|x| (-(x - m) * (x - m) / 2.0).exp()).collect::<Vec<f64>>();
        let a = 0.7;
        assert!((w2_densities(&nodes, &g(a), &g(0.0)).unwrap() - a).abs() < 1e-9);
        assert_eq!(w2_densities(&nodes, &g(0.0), &g(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_pair_matches_closed_form() {
        let n = 8001;
        let nodes: Vec<f64> = (0..n).map(|i| -15.0 + 30.0 * i as f64 / (n - 1) as f64).collect();
        let g = |m: f64, s: f64| nodes.iter().map(|x| (-(x - m) * (x - m) / (2.0 * s * s)).exp() / s).collect::<Vec<f64>>();
        let w = w2_densities(&nodes, &g(0.5, 1.0), &g(-0.3, 1.6)).unwrap();
        let exact = (0.8f64 * 0.8 + 0.6 * 0.6).sqrt();
        assert!((w - exact).abs() < 1e-4, "{w} vs {exact}");
    }

    #[test]
    fn gaps_in_support_are_jumped() {
        let nodes: Vec<f64> = (0..5).map(|i| i as f64).collect();
        // Mass on [0,1] and [3,4] against mass on [0,1] only.
        let p = [1.0, 1.0, 0.0, 1.0, 1.0];
        let q = [1.0, 1.0, 0.0, 0.0, 0.0];
        let w = w2_densities(&nodes, &p, &q).unwrap();
        assert!(w > 1.0 && w.is_finite());
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in prop::collection::vec(0.01f64..2.0, 33),
                               b in prop::collection::vec(0.01f64..2.0, 33),
                               c in prop::collection::vec(0.01f64..2.0, 33)) {
            let nodes: Vec<f64> = (0..33).map(|i| i as f64 / 32.0).collect();
            let ab = w2_densities(&nodes, &a, &b).unwrap();
            let bc = w2_densities(&nodes, &b, &c).unwrap();
            let ac = w2_densities(&nodes, &a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-8);
            prop_assert!((ab - w2_densities(&nodes, &b, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn scale_invariance(c in 0.1f64..10.0) {
            let mu = uniform(201);
            let f: Vec<f64> = mu.nodes.iter().map(|x| 1.0 + 0.3 * (3.0 * x).sin()).collect();
            let g: Vec<f64> = f.iter().map(|v| c * v).collect();
            let (e1, i1) = entropy_and_energy(&mu, &f).unwrap();
            let (e2, i2) = entropy_and_energy(&mu, &g).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12 && (i1 - i2).abs() < 1e-10);
        }
    }
}
