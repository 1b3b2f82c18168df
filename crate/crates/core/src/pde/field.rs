use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial coordinate of a 1D solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Geometry {
    /// Cartesian coordinate on an interval.
    Line,
    /// Radius of a radially symmetric problem in `dim` dimensions.
    Radial { dim: usize },
}

impl Geometry {
    /// Jacobian of the coordinate (`r^{d-1}` up to the sphere area).
    pub fn jacobian(&self, x: f64) -> f64 {
        match *self {
            Geometry::Line => 1.0,
            Geometry::Radial { dim } => x.powi(dim as i32 - 1),
        }
    }
}

/// Scheme metadata carried with every solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeMeta {
    pub spacing: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub geometry: Geometry,
    /// Formal order of the Robin closure.
    pub boundary_order: u8,
    /// Robin coefficients at the two ends (`None`: regular center, no boundary).
    pub q_left: Option<f64>,
    pub q_right: Option<f64>,
}

/// Solution snapshot on a uniform grid whose end nodes lie on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridField {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub time: f64,
    /// Cell weights `∫_cell J e^V` of the finite-volume scheme; the discrete
    /// operator is self-adjoint with respect to them.
    pub weights: Vec<f64>,
    pub meta: SchemeMeta,
}

impl GridField {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.meta.spacing
    }

    fn check_span(&self, x: f64) -> Result<()> {
        let (a, b) = (self.nodes[0], *self.nodes.last().unwrap());
        let tol = 1e-12 * (b - a).abs().max(1.0);
        if !(x >= a - tol && x <= b + tol) {
            return Err(Error::invalid(format!("coordinate {x} outside the grid span [{a}, {b}]")));
        }
        Ok(())
    }

    /// Cubic Lagrange interpolation on the four surrounding nodes.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        self.check_span(x)?;
        let n = self.len();
        let h = self.spacing();
        let s = ((x - self.nodes[0]) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let start = i.saturating_sub(1).min(n - 4);
        let mut v = 0.0;
        for j in start..start + 4 {
            let mut w = 1.0;
            for m in start..start + 4 {
                if m != j {
                    w *= (s - m as f64) / (j as f64 - m as f64);
                }
            }
            v += w * self.values[j];
        }
        Ok(v)
    }

    /// Derivative at every node, see [`stencil_derivatives`].
    pub fn nodal_derivatives(&self) -> Vec<f64> {
        stencil_derivatives(&self.values, self.spacing())
    }

    /// Writes `node,value` rows with a header.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "node,value")?;
        for (x, v) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }
}

/// Derivatives of uniformly spaced samples: fourth-order central stencil
/// inside, third-order one-sided stencils on the two nodes next to each end.
/// Needs at least four samples.
pub fn stencil_derivatives(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    assert!(n >= 4, "need at least four samples");
    (0..n)
        .map(|i| {
            if i == 0 {
                (-11.0 * u[0] + 18.0 * u[1] - 9.0 * u[2] + 2.0 * u[3]) / (6.0 * h)
            } else if i == 1 {
                (-2.0 * u[0] - 3.0 * u[1] + 6.0 * u[2] - u[3]) / (6.0 * h)
            } else if i == n - 1 {
                (11.0 * u[n - 1] - 18.0 * u[n - 2] + 9.0 * u[n - 3] - 2.0 * u[n - 4]) / (6.0 * h)
            } else if i == n - 2 {
                (2.0 * u[n - 1] + 3.0 * u[n - 2] - 6.0 * u[n - 3] + u[n - 4]) / (6.0 * h)
            } else {
                (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h)
            }
        })
        .collect()
}

/// Derivative of the field at `x`: nodal stencils, linearly interpolated.
pub fn field_gradient(field: &GridField, x: f64) -> Result<f64> {
    field.check_span(x)?;
    let d = field.nodal_derivatives();
    let n = d.len();
    let s = ((x - field.nodes[0]) / field.spacing()).clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    let tau = s - i as f64;
    Ok(d[i] + tau * (d[i + 1] - d[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn field(f: impl Fn(f64) -> f64, n: usize) -> GridField {
        let h = 1.0 / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        GridField {
            values: nodes.iter().map(|&x| f(x)).collect(),
            weights: vec![h; n],
            nodes,
            time: 0.0,
            meta: SchemeMeta {
                spacing: h,
                dt: 0.0,
                n_steps: 0,
                geometry: Geometry::Line,
                boundary_order: 2,
                q_left: Some(0.0),
                q_right: Some(0.0),
            },
        }
    }

    #[test]
    fn linear_fields_are_differentiated_exactly() {
        let g = field(|x| 3.0 * x - 1.0, 33);
        for x in [0.0, 0.013, 0.5, 0.99, 1.0] {
            assert_abs_diff_eq!(field_gradient(&g, x).unwrap(), 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g.value_at(x).unwrap(), 3.0 * x - 1.0, epsilon = 1e-12);
        }
        assert!(field_gradient(&g, 1.1).is_err());
    }

    #[test]
    fn stencils_are_high_order() {
        let errs: Vec<f64> = [17, 33, 65]
            .iter()
            .map(|&n| {
                let g = field(|x| (2.0 * x).sin(), n);
                g.nodal_derivatives()
                    .iter()
                    .zip(&g.nodes)
                    .map(|(d, x)| (d - 2.0 * (2.0 * x).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] / errs[1] > 7.0 && errs[1] / errs[2] > 7.0, "{errs:?}");
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = field(|x| x * x * x - 2.0 * x, 20);
        for x in [0.001, 0.31, 0.777, 0.999] {
            assert_abs_diff_eq!(g.value_at(x).unwrap(), x * x * x - 2.0 * x, epsilon = 1e-13);
        }
    }
}
