use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainModel;
use crate::stochastics::drift::DriftField;
use crate::stochastics::path::{PathSample, Step};

/// Boundary treatment of the damped transport. With both flags off only
/// the interior equation `d𝕄 = -𝕄 R dt` is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportFlags {
    /// Kill the normal component at each contact: `𝕄 ← 𝕄 (I - N Nᵀ)`.
    pub boundary_projection: bool,
    /// Damp tangential components by `exp(-II Δl)` at each contact.
    pub curvature_damping: bool,
}

impl Default for TransportFlags {
    fn default() -> Self {
        TransportFlags { boundary_projection: true, curvature_damping: true }
    }
}

impl TransportFlags {
    pub const INTERIOR_ONLY: TransportFlags =
        TransportFlags { boundary_projection: false, curvature_damping: false };
}

/// Incremental damped transport along a path on a flat domain, where the
/// horizontal frame is the identity and `R = -Hess V`.
#[derive(Debug, Clone)]
pub struct DampedTransport<'a> {
    domain: &'a DomainModel,
    step_factor: Matrix3<f64>,
    identity: Matrix3<f64>,
    flags: TransportFlags,
    m: Matrix3<f64>,
}

impl<'a> DampedTransport<'a> {
    pub fn new(domain: &'a DomainModel, drift: &DriftField, dt: f64, flags: TransportFlags) -> Self {
        let mut identity = Matrix3::zeros();
        for i in 0..domain.dim() {
            identity[(i, i)] = 1.0;
        }
        // 𝕄 ← 𝕄 (I - R dt) with R = -Hess V.
        let step_factor = identity + drift.hessian() * dt;
        DampedTransport { domain, step_factor, identity, flags, m: identity }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn advance(&mut self, step: &Step) -> Result<()> {
        self.m *= self.step_factor;
        if step.contact && (self.flags.boundary_projection || self.flags.curvature_damping) {
            let frame = self.domain.boundary_frame(&step.x_end)?;
            let nn = frame.normal * frame.normal.transpose();
            let tangent = self.identity - nn;
            let damp = if self.flags.curvature_damping {
                (-frame.second_fundamental_form * step.dl).exp()
            } else {
                1.0
            };
            let normal_part = if self.flags.boundary_projection { 0.0 } else { 1.0 };
            self.m *= nn * normal_part + tangent * damp;
        }
        Ok(())
    }
}

/// The matrices `𝕄_{t_k}` at every node of a stored path.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeFunctional {
    pub matrices: Vec<Matrix3<f64>>,
    pub flags: TransportFlags,
}

pub fn damped_transport(
    path: &PathSample,
    drift: &DriftField,
    domain: &DomainModel,
    flags: TransportFlags,
) -> Result<MultiplicativeFunctional> {
    let n = path.n_steps();
    let boundary = flags.boundary_projection || flags.curvature_damping;
    if boundary && (path.contact_flags.len() != n || path.local_time.len() != n + 1) {
        return Err(Error::Precondition(
            "boundary handling requested but the path carries no contact data".into(),
        ));
    }
    let mut t = DampedTransport::new(domain, drift, path.dt, flags);
    let mut matrices = Vec::with_capacity(n + 1);
    matrices.push(*t.matrix());
    for step in path.steps() {
        t.advance(&step)?;
        matrices.push(*t.matrix());
    }
    Ok(MultiplicativeFunctional { matrices, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::stochastics::path::{simulate_reflecting_path, ReflectingDiffusion};
    use crate::stochastics::rng::SeedStream;

    #[test]
    fn identity_without_drift_or_contact() {
        let dom = DomainModel::ball(1.0, 2).unwrap();
        let z = DriftField::zero(2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let p = simulate_reflecting_path(&proc, &Point::zeros(), 0.01, 1e-3, &SeedStream::new(0), 0).unwrap();
        assert!(p.contact_flags.iter().all(|c| !c));
        let m = damped_transport(&p, &z, &dom, TransportFlags::default()).unwrap();
        let mut id = Matrix3::zeros();
        id[(0, 0)] = 1.0;
        id[(1, 1)] = 1.0;
        assert!(m.matrices.iter().all(|x| *x == id));
    }

    #[test]
    fn quadratic_potential_gives_matrix_exponential() {
        // Far from the boundary, 𝕄_t = exp(tH) up to the Euler product error.
        let dom = DomainModel::ball(100.0, 2).unwrap();
        let h = Matrix3::new(1.0, 0.3, 0.0, 0.3, -0.5, 0.0, 0.0, 0.0, 0.0);
        let z = DriftField::new(crate::stochastics::Potential::Quadratic { hessian: h, center: Point::zeros() }, 2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let dt = 1e-4;
        let p = simulate_reflecting_path(&proc, &Point::zeros(), 1.0, dt, &SeedStream::new(0), 0).unwrap();
        let m = damped_transport(&p, &z, &dom, TransportFlags::default()).unwrap();
        let exact = h.fixed_view::<2, 2>(0, 0).clone_owned().exp();
        let got = m.matrices.last().unwrap().fixed_view::<2, 2>(0, 0).clone_owned();
        assert!((got - exact).abs().max() < 2.0 * dt * exact.norm());
    }

    #[test]
    fn half_line_transport_is_killed_at_first_contact() {
        let dom = DomainModel::HalfLine;
        let z = DriftField::zero(1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        for i in 0..20 {
            let p = simulate_reflecting_path(&proc, &Point::new(0.2, 0.0, 0.0), 1.0, 1e-3, &SeedStream::new(2), i).unwrap();
            let m = damped_transport(&p, &z, &dom, TransportFlags::default()).unwrap();
            let tau = p.contact_flags.iter().position(|&c| c).map_or(usize::MAX, |k| k + 1);
            for (k, mk) in m.matrices.iter().enumerate() {
                assert_eq!(mk[(0, 0)], if k < tau { 1.0 } else { 0.0 });
            }
            let literal = damped_transport(&p, &z, &dom, TransportFlags::INTERIOR_ONLY).unwrap();
            assert!(literal.matrices.iter().all(|x| x[(0, 0)] == 1.0));
        }
    }

    #[test]
    fn norm_bounded_by_curvature_envelope() {
        let dom = DomainModel::annulus(0.5, 1.5).unwrap();
        let z = DriftField::isotropic(0.4, Point::new(0.1, 0.0, 0.0), 2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let k = z.curvature_bound();
        let sigma = dom.curvature_data().sigma;
        for i in 0..30 {
            let p = simulate_reflecting_path(&proc, &Point::new(0.55, 0.0, 0.0), 1.0, 1e-3, &SeedStream::new(8), i).unwrap();
            let m = damped_transport(&p, &z, &dom, TransportFlags { boundary_projection: false, curvature_damping: true }).unwrap();
            for (j, mk) in m.matrices.iter().enumerate() {
                let bound = (k * p.times[j] + sigma * p.local_time[j]).exp();
                assert!(mk.fixed_view::<2, 2>(0, 0).clone_owned().norm() <= bound * (1.0 + 1e-12) * 2f64.sqrt());
                let op = mk.fixed_view::<2, 2>(0, 0).singular_values().max();
                assert!(op <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn boundary_flags_need_contact_data() {
        let dom = DomainModel::HalfLine;
        let z = DriftField::zero(1).unwrap();
        let p = PathSample {
            dt: 0.1,
            times: vec![0.0, 0.1],
            states: vec![Point::zeros(); 2],
            local_time: vec![0.0, 0.0],
            brownian_increments: vec![Point::zeros()],
            contact_flags: vec![],
        };
        assert!(damped_transport(&p, &z, &dom, TransportFlags::default()).is_err());
    }
}
