use thiserror::Error;

/// Errors shared by every module. Numeric payloads are widened to f64 so
/// the error type stays independent of the scalar parameter.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input data violates a declared constraint (bad densities, bad
    /// tolerances, unknown profile name, ...).
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The operation is not defined for these arguments (t <= 0,
    /// sigma2 = 0 for the joint law, gamma <= 1, non-C1 profile, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its subdivision budget. Carries the
    /// achieved error estimate next to the requested one.
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Tolerance { achieved: f64, requested: f64 },

    /// The normalizing mass at (t, x) underflowed the vacuum floor; the
    /// mean velocity is undefined there.
    #[error("vacuum region at t={t}, x={x}: normalized mass {mass:e} below {floor:e}")]
    Vacuum { t: f64, x: f64, mass: f64, floor: f64 },

    /// A characteristic root sits on (or numerically at) a focal point.
    #[error("degenerate characteristic root at s={s}: |1 + t u0'(s)| = {jac:e}")]
    DegenerateRoot { s: f64, jac: f64 },

    /// No roots carry mass: the query point is outside every stream.
    #[error("vacuum at t={t}, x={x}: no characteristic branch carries mass")]
    EmptyFan { t: f64, x: f64 },

    /// The requested window does not effectively contain the initial mass.
    #[error("window error: {0}")]
    Window(String),

    /// Rarefaction Riemann data (u2 >= 0): no exact free-particle solution
    /// is provided for the vacuum region.
    #[error("rarefaction data (u2 >= 0): exact compression solution does not apply")]
    Rarefaction,

    /// The energy jump condition does not determine gamma.
    #[error("indeterminate adiabatic exponent: {0}")]
    Indeterminate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
