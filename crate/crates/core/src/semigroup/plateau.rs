//! The smooth plateau `Φ`: 1 on `[0, 1]`, 0 on `[2, ∞)`, built from
//! `g(x) = e^{-1/x}` as `Φ(s) = g(2 - s) / (g(2 - s) + g(s - 1))`.

use std::sync::OnceLock;

use crate::numerics::hermite;

/// `g`, `g'`, `g''` of `g(x) = e^{-1/x}` (zero for `x ≤ 0`).
fn flat(x: f64) -> (f64, f64, f64) {
    // e^{-1/x} underflows long before 1/x⁴ overflows; cut off early so the
    // derivative products never form 0·∞.
    if x <= 1e-3 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / x).exp();
    let x2 = x * x;
    (g, g / x2, g * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// `(Φ(s), Φ'(s), Φ''(s))`.
pub fn plateau(s: f64) -> (f64, f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let (a, ga1, ga2) = flat(2.0 - s);
    let (b, gb1, gb2) = flat(s - 1.0);
    // d/ds of a(s) = g(2 - s) flips the sign of odd derivatives.
    let (a1, a2) = (-ga1, ga2);
    let (b1, b2) = (gb1, gb2);
    let sum = a + b;
    let s1 = a1 + b1;
    let s2 = a2 + b2;
    let phi = a / sum;
    // Written as a difference of same-signed products so Φ' ≤ 0 exactly.
    let d1 = (a1 * b - a * b1) / (sum * sum);
    let d2 = a2 / sum - 2.0 * a1 * s1 / (sum * sum) - a * s2 / (sum * sum) + 2.0 * a * s1 * s1 / (sum * sum * sum);
    (phi, d1, d2)
}

const TABLE: usize = 2048;

fn table() -> &'static Vec<f64> {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        // Cumulative ∫₁ˢ Φ on a uniform grid, five-point Gauss–Legendre per cell.
        let h = 1.0 / TABLE as f64;
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let mut out = Vec::with_capacity(TABLE + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..TABLE {
            let mid = 1.0 + (i as f64 + 0.5) * h;
            acc += nodes.iter().map(|(x, w)| w * plateau(mid + 0.5 * h * x).0).sum::<f64>() * 0.5 * h;
            out.push(acc);
        }
        out
    })
}

/// `∫₀ᵘ Φ(s) ds`; equals `u` on `[0, 1]` and `3/2` beyond 2.
pub fn plateau_integral(u: f64) -> f64 {
    if u <= 1.0 {
        return u;
    }
    let t = table();
    if u >= 2.0 {
        return 1.0 + t[TABLE];
    }
    let h = 1.0 / TABLE as f64;
    let pos = (u - 1.0) / h;
    let i = (pos.floor() as usize).min(TABLE - 1);
    let tau = pos - i as f64;
    let x0 = 1.0 + i as f64 * h;
    1.0 + hermite(t[i], t[i + 1], plateau(x0).0, plateau(x0 + h).0, h, tau)
}

/// Smooth step rising from 0 at `a` to 1 at `b`, flat at both ends.
pub fn smooth_step(x: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let w = b - a;
    let (p, d1, d2) = plateau(1.0 + (x - a) / w);
    (1.0 - p, -d1 / w, -d2 / (w * w))
}
