use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points live in R³; components beyond the domain dimension are zero.
pub type Point = Vector3<f64>;

/// Absolute tolerance for "on the boundary" / "inside the closure" tests.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Radius below which a point counts as the center of a ball or annulus.
const CENTER_TOL: f64 = 1e-14;

/// Flat model domains with closed-form boundary geometry.
///
/// Sign conventions: `N` is the inward unit normal and the second fundamental
/// form is `II(X, X) = -<∇_X N, X>`. A convex boundary has `II ≥ 0`:
///
/// | domain   | component | N         | II        |
/// |----------|-----------|-----------|-----------|
/// | ball     | sphere    | `-x/|x|`  | `+1/R`    |
/// | annulus  | inner     | `+x/|x|`  | `-1/r_in` |
/// | annulus  | outer     | `-x/|x|`  | `+1/r_out`|
/// | interval | endpoints | `±1`      | `0`       |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainModel {
    HalfLine,
    Interval { length: f64 },
    Ball { radius: f64, dim: usize },
    Annulus { r_in: f64, r_out: f64 },
}

/// Curvature constants consumed by the comparison machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureData {
    /// `II ≥ -sigma`.
    pub sigma: f64,
    /// `II ≤ gamma`.
    pub gamma: f64,
    /// Upper bound of the sectional curvature; zero for flat domains.
    pub k: f64,
    /// Collar width on which the boundary distance is smooth (may be infinite).
    pub inj_boundary: f64,
}

/// Inward normal and (isotropic) second fundamental form at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub normal: Point,
    pub second_fundamental_form: f64,
    pub component: usize,
}

impl DomainModel {
    pub fn half_line() -> Self {
        DomainModel::HalfLine
    }

    pub fn interval(length: f64) -> Result<Self> {
        let d = DomainModel::Interval { length };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        let d = DomainModel::Ball { radius, dim };
        d.validate()?;
        Ok(d)
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Result<Self> {
        let d = DomainModel::Annulus { r_in, r_out };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            DomainModel::HalfLine => Ok(()),
            DomainModel::Interval { length } => pos("length", length),
            DomainModel::Ball { radius, dim } => {
                pos("radius", radius)?;
                if !(1..=3).contains(&dim) {
                    return Err(Error::invalid(format!("ball dimension must be 1, 2 or 3, got {dim}")));
                }
                Ok(())
            }
            DomainModel::Annulus { r_in, r_out } => {
                pos("r_in", r_in)?;
                pos("r_out", r_out)?;
                if r_in >= r_out {
                    return Err(Error::invalid(format!("annulus needs r_in < r_out, got {r_in} >= {r_out}")));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            DomainModel::HalfLine | DomainModel::Interval { .. } => 1,
            DomainModel::Ball { dim, .. } => dim,
            DomainModel::Annulus { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainModel::HalfLine => "half_line",
            DomainModel::Interval { .. } => "interval",
            DomainModel::Ball { .. } => "ball",
            DomainModel::Annulus { .. } => "annulus",
        }
    }

    /// Number of boundary components. The ball in d=1 is the interval
    /// `[-R, R]` but is still treated as a single (disconnected) sphere.
    pub fn boundary_components(&self) -> usize {
        match self {
            DomainModel::HalfLine | DomainModel::Ball { .. } => 1,
            DomainModel::Interval { .. } | DomainModel::Annulus { .. } => 2,
        }
    }

    fn radius_of(&self, x: &Point) -> f64 {
        match self.dim() {
            1 => x[0].abs(),
            2 => x[0].hypot(x[1]),
            _ => x.norm(),
        }
    }

    /// Distance to the boundary inside the domain, minus the distance to the
    /// closure outside of it.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        match *self {
            DomainModel::HalfLine => x[0],
            DomainModel::Interval { length } => x[0].min(length - x[0]),
            DomainModel::Ball { radius, .. } => radius - self.radius_of(x),
            DomainModel::Annulus { r_in, r_out } => {
                let r = self.radius_of(x);
                (r - r_in).min(r_out - r)
            }
        }
    }

    /// Boundary component closest to `x` (ties go to the lower index).
    pub fn nearest_component(&self, x: &Point) -> usize {
        match *self {
            DomainModel::HalfLine | DomainModel::Ball { .. } => 0,
            DomainModel::Interval { length } => usize::from(x[0] > 0.5 * length),
            DomainModel::Annulus { r_in, r_out } => {
                let r = self.radius_of(x);
                usize::from(r - r_in > r_out - r)
            }
        }
    }

    /// Distance to the boundary, for points in the closure.
    pub fn dist_to_boundary(&self, x: &Point) -> Result<f64> {
        let s = self.signed_distance(x);
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("point {:?}", x.as_slice())));
        }
        if s < -BOUNDARY_TOL {
            return Err(Error::DomainViolation { point: arr(x), excess: -s });
        }
        Ok(s.max(0.0))
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.signed_distance(x) >= -BOUNDARY_TOL
    }

    /// Gradient of the boundary distance, i.e. the inward normal of the
    /// nearest component transported along the normal line.
    pub fn grad_distance(&self, x: &Point) -> Result<Point> {
        let d = self.dim();
        let radial = || -> Result<Point> {
            let r = self.radius_of(x);
            if r < CENTER_TOL {
                return Err(Error::DegenerateProjection { point: arr(x) });
            }
            let mut u = *x / r;
            for i in d..3 {
                u[i] = 0.0;
            }
            Ok(u)
        };
        match *self {
            DomainModel::HalfLine => Ok(Point::x()),
            DomainModel::Interval { .. } => {
                Ok(if self.nearest_component(x) == 0 { Point::x() } else { -Point::x() })
            }
            DomainModel::Ball { .. } => Ok(-radial()?),
            DomainModel::Annulus { .. } => {
                let u = radial()?;
                Ok(if self.nearest_component(x) == 0 { u } else { -u })
            }
        }
    }

    /// Closed-form Laplacian of the boundary distance where it is smooth.
    pub fn laplacian_distance(&self, x: &Point) -> Result<f64> {
        match *self {
            DomainModel::HalfLine | DomainModel::Interval { .. } => Ok(0.0),
            DomainModel::Ball { dim, .. } => {
                let r = self.radius_of(x);
                if r < CENTER_TOL {
                    return Err(Error::DegenerateProjection { point: arr(x) });
                }
                Ok(-((dim - 1) as f64) / r)
            }
            DomainModel::Annulus { .. } => {
                let r = self.radius_of(x);
                Ok(if self.nearest_component(x) == 0 { 1.0 / r } else { -1.0 / r })
            }
        }
    }

    pub fn boundary_frame(&self, y: &Point) -> Result<BoundaryFrame> {
        let s = self.signed_distance(y);
        if s.abs() > BOUNDARY_TOL {
            return Err(Error::NotOnBoundary { point: arr(y), distance: s });
        }
        let component = self.nearest_component(y);
        let normal = self.grad_distance(y)?;
        let second_fundamental_form = match *self {
            DomainModel::HalfLine | DomainModel::Interval { .. } => 0.0,
            DomainModel::Ball { radius, dim } => {
                if dim == 1 {
                    0.0
                } else {
                    1.0 / radius
                }
            }
            DomainModel::Annulus { r_in, r_out } => {
                if component == 0 {
                    -1.0 / r_in
                } else {
                    1.0 / r_out
                }
            }
        };
        Ok(BoundaryFrame { normal, second_fundamental_form, component })
    }

    /// Nearest point of the closure and the distance travelled to reach it.
    pub fn project_with_penetration(&self, x: &Point) -> Result<(Point, f64)> {
        let s = self.signed_distance(x);
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("point {:?}", x.as_slice())));
        }
        if s >= 0.0 {
            return Ok((*x, 0.0));
        }
        let depth = -s;
        let projected = match *self {
            DomainModel::HalfLine => Point::zeros(),
            DomainModel::Interval { length } => Point::new(x[0].clamp(0.0, length), 0.0, 0.0),
            DomainModel::Ball { radius, .. } => *x * (radius / self.radius_of(x)),
            DomainModel::Annulus { r_in, r_out } => {
                let r = self.radius_of(x);
                if r < CENTER_TOL * r_in {
                    return Err(Error::DegenerateProjection { point: arr(x) });
                }
                let target = if r < r_in { r_in } else { r_out };
                *x * (target / r)
            }
        };
        Ok((projected, depth))
    }

    pub fn curvature_data(&self) -> CurvatureData {
        let (sigma, gamma, inj_boundary) = match *self {
            DomainModel::HalfLine => (0.0, 0.0, f64::INFINITY),
            DomainModel::Interval { length } => (0.0, 0.0, 0.5 * length),
            DomainModel::Ball { radius, dim } => {
                (0.0, if dim == 1 { 0.0 } else { 1.0 / radius }, radius)
            }
            // The normal lines from the inner circle focus at the center, so
            // the collar is also limited by r_in, besides the half-width.
            DomainModel::Annulus { r_in, r_out } => {
                (1.0 / r_in, 1.0 / r_out, r_in.min(0.5 * (r_out - r_in)))
            }
        };
        CurvatureData { sigma, gamma, k: 0.0, inj_boundary }
    }

    /// A characteristic length scale (used for sampling grids).
    pub fn scale(&self) -> f64 {
        match *self {
            DomainModel::HalfLine => 1.0,
            DomainModel::Interval { length } => length,
            DomainModel::Ball { radius, .. } => radius,
            DomainModel::Annulus { r_out, .. } => r_out,
        }
    }

    /// Point at distance `s` from boundary component `component`, in the
    /// direction given by the unit-square coordinates `(u, v)`.
    pub fn point_at_distance(&self, component: usize, s: f64, u: f64, v: f64) -> Point {
        let dir = |dim: usize| -> Point {
            match dim {
                1 => Point::new(if u < 0.5 { -1.0 } else { 1.0 }, 0.0, 0.0),
                2 => {
                    let th = 2.0 * PI * u;
                    Point::new(th.cos(), th.sin(), 0.0)
                }
                _ => {
                    let z = 1.0 - 2.0 * v;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let th = 2.0 * PI * u;
                    Point::new(rho * th.cos(), rho * th.sin(), z)
                }
            }
        };
        match *self {
            DomainModel::HalfLine => Point::new(s, 0.0, 0.0),
            DomainModel::Interval { length } => {
                Point::new(if component == 0 { s } else { length - s }, 0.0, 0.0)
            }
            DomainModel::Ball { radius, dim } => dir(dim) * (radius - s),
            DomainModel::Annulus { r_in, r_out } => {
                dir(2) * if component == 0 { r_in + s } else { r_out - s }
            }
        }
    }

    /// Deterministic sample of boundary points, used for suprema over ∂M.
    pub fn boundary_samples(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        match *self {
            DomainModel::HalfLine => vec![Point::zeros()],
            DomainModel::Interval { length } => vec![Point::zeros(), Point::new(length, 0.0, 0.0)],
            DomainModel::Ball { dim: 1, radius } => {
                vec![Point::new(-radius, 0.0, 0.0), Point::new(radius, 0.0, 0.0)]
            }
            _ => {
                let mut out = Vec::new();
                for c in 0..self.boundary_components() {
                    for i in 0..n {
                        let u = (i as f64 + 0.5) / n as f64;
                        // Fibonacci lattice in 3D; evenly spaced angles in 2D.
                        let v = (i as f64 * 0.618_033_988_749_894_9).fract();
                        let (u, v) = if self.dim() == 3 { (v, u) } else { (u, 0.5) };
                        out.push(self.point_at_distance(c, 0.0, u, v));
                    }
                }
                out
            }
        }
    }
}

pub(crate) fn arr(x: &Point) -> [f64; 3] {
    [x[0], x[1], x[2]]
}
