//! Monte Carlo evaluation of the Robin semigroup, its gradient (Bismut
//! formula and Hsu envelope) and its Schrödinger approximation.

mod bismut;
mod generator;
pub mod plateau;
mod robin;
mod schrodinger;

pub use bismut::{
    bismut_gradient_mc, bismut_gradient_schedules, hsu_bound_rhs_mc, GradientEnvelope, Schedule,
};
pub use generator::{generator_residual, GeneratorResidual, TestFunction, D0_TOLERANCE};
pub use robin::{chapman_kolmogorov_residual, robin_pt_mc, Observable, RobinCoefficient, SemigroupResidual};
pub use schrodinger::{build_schrodinger_extension, schrodinger_pt_mc, SchrodingerExtension, SchrodingerReport};
