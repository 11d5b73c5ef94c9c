//! Stochastic regularization of pressureless gas dynamics in one space
//! dimension.
//!
//! The perturbed particle system
//!
//! ```text
//! dX = U dt + sigma1 dW1,   dU = sigma2 dW2,   (X, U)(0) = (x, u0(x))
//! ```
//!
//! with mass density rho0 has a closed-form joint law, and its marginals
//! (rho_sigma, u_sigma) solve a pair of viscous balance laws whose
//! sigma -> 0 limit is the pressureless gas dynamics system — augmented,
//! after shocks form, by the gradient of a spurious pressure. This crate
//! evaluates those closed forms, their characteristic limits, a Monte
//! Carlo oracle for them, the balance-law residuals, and the exact
//! free-particle Riemann solution with its Hugoniot/adiabatic-exponent
//! algebra.
//!
//! Core math is generic over the scalar via [`scalar::Real`]; the
//! `*64` aliases below fix f64 for everyday use.

pub mod balance;
pub mod characteristics;
pub mod error;
pub mod kernel;
pub mod montecarlo;
pub mod profiles;
pub mod riemann;
pub mod scalar;

mod quad;
mod scan;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 aliases for the domain types.
pub type Profile64 = profiles::InitialProfile<f64>;
pub type RiemannData64 = profiles::RiemannData<f64>;
pub type Sigma64 = kernel::SigmaPair<f64>;
pub type QuadratureConfig64 = kernel::QuadratureConfig<f64>;
pub type FieldSample64 = kernel::FieldSample<f64>;
pub type ShockFan64 = riemann::ShockFan<f64>;
pub type Ensemble64 = montecarlo::ParticleEnsemble<f64>;
