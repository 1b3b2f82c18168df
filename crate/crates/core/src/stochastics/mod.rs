//! Reflecting diffusions, boundary local time and damped transport.

mod drift;
mod ensemble;
mod local_time;
mod path;
pub mod rng;
mod transport;

pub use drift::{DriftField, Potential};
pub use ensemble::{par_map, simulate_ensemble, Ensemble, McEstimate, McParams, McVecEstimate};
pub use local_time::{
    generator_of_profile, local_time_exp_moment, local_time_exp_moment_ladder, local_time_identity,
    local_time_mean_ladder, ExpMomentReport, LocalTimeIdentity,
};
pub use path::{simulate_reflecting_path, PathSample, ReflectingDiffusion, ReflectionScheme, Step, TimeGrid, Walker};
pub use rng::SeedStream;
pub use transport::{damped_transport, DampedTransport, MultiplicativeFunctional, TransportFlags};
