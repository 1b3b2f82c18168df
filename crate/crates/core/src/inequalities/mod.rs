//! Entropy, energy and transport functionals on weighted 1D (or radial)
//! measures, and slack reports for the local-time envelope, the Dirichlet
//! form, symmetry, the semigroup log-Sobolev inequality and HWI.

mod envelope;
mod forms;
mod functionals;
mod hwi;
mod measure;

pub use envelope::{local_time_envelope_bound, optimal_local_time_envelope, EnvelopeMinimum, EtaTable, RADIUS_GRID};
pub use forms::{dirichlet_form, dirichlet_form_residual, symmetry_residual, SymmetryResidual};
pub use functionals::{entropy_and_energy, normalize, w2_1d, w2_densities, xlogx};
pub use hwi::{
    hwi_slack, log_sobolev_34_slack, optimal_schedule, schedule_integrals, HwiMode, HwiReport, LogSobolevReport,
    ScheduleIdentity,
};
pub use measure::{BoundaryNode, WeightedMeasure1D};
