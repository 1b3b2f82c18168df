//! Robin-boundary heat semigroups through reflecting diffusions.
//!
//! The semigroup `P_t^Q f(x) = E^x[f(X_t) exp(∫₀ᵗ Q(X_s) dl_s)]` is evaluated
//! by Monte Carlo over reflecting paths with boundary local time `l`, and
//! cross-checked against a Crank–Nicolson solver of
//! `∂_t u = Δu + <∇V, ∇u>` with `<N, ∇u> + Q u = 0` on the boundary.
//! Around that core sit estimators for gradient formulas and checks of the
//! local-time bounds and functional inequalities the semigroup satisfies.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod numerics;
pub mod pde;
pub mod semigroup;
pub mod stochastics;

pub use error::{Error, Result};
