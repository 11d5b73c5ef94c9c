//! Initial data (rho0, u0): the analytic test-profile registry, Riemann
//! step data, and mollification of discontinuous profiles.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadTolerance};
use crate::scalar::Real;

type Field<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// How the profile was constructed; C1 data is guaranteed for `Analytic`
/// and `Mollified`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Analytic,
    RiemannStep,
    Mollified,
}

/// Piecewise-constant Riemann data: rho0 = rho1 + rho2 theta(x),
/// u0 = u1 + u2 theta(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannData<T> {
    pub rho1: T,
    pub rho2: T,
    pub u1: T,
    pub u2: T,
}

impl<T: Real> RiemannData<T> {
    pub fn new(rho1: T, rho2: T, u1: T, u2: T) -> Result<Self> {
        let data = RiemannData { rho1, rho2, u1, u2 };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2), ("u1", self.u1), ("u2", self.u2)] {
            if !v.is_finite() {
                return Err(Error::Constraint(format!("{name} must be finite")));
            }
        }
        if !(self.rho1 > T::zero()) {
            return Err(Error::Constraint("rho1 must be positive".into()));
        }
        if !(self.rho1 + self.rho2 > T::zero()) {
            return Err(Error::Constraint("rho1 + rho2 must be positive".into()));
        }
        Ok(())
    }
}

/// Smoothing radius for the standard averaging kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierConfig<T> {
    pub epsilon: T,
}

impl<T: Real> MollifierConfig<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::Constraint("mollifier epsilon must be positive".into()));
        }
        Ok(MollifierConfig { epsilon })
    }
}

/// Initial data (rho0, u0) as evaluable 1D functions with declared bounds.
///
/// Immutable after construction; evaluation is safe from multiple threads.
#[derive(Clone)]
pub struct InitialProfile<T> {
    rho0: Field<T>,
    u0: Field<T>,
    u0_prime: Option<Field<T>>,
    kind: ProfileKind,
    density_bound: T,
    velocity_bound: T,
    feature_window: (T, T),
    step: Option<RiemannData<T>>,
    /// Discontinuity locations of (rho0, u0), sorted; quadratures split
    /// their domains here so every piece sees a smooth integrand.
    jumps: Vec<T>,
}

impl<T: Real> std::fmt::Debug for InitialProfile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialProfile")
            .field("kind", &self.kind)
            .field("density_bound", &self.density_bound)
            .field("velocity_bound", &self.velocity_bound)
            .field("feature_window", &self.feature_window)
            .finish()
    }
}

impl<T: Real> InitialProfile<T> {
    pub fn rho0(&self, s: T) -> T {
        (self.rho0)(s)
    }

    pub fn u0(&self, s: T) -> T {
        (self.u0)(s)
    }

    /// Exact velocity gradient; a domain error for non-C1 profiles.
    pub fn u0_prime(&self, s: T) -> Result<T> {
        match &self.u0_prime {
            Some(f) => Ok(f(s)),
            None => Err(Error::Domain("profile is not C1: u0_prime unavailable".into())),
        }
    }

    pub fn is_c1(&self) -> bool {
        self.u0_prime.is_some()
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Declared (trusted) bound on rho0.
    pub fn density_bound(&self) -> T {
        self.density_bound
    }

    /// Declared (trusted) bound on |u0|.
    pub fn velocity_bound(&self) -> T {
        self.velocity_bound
    }

    /// Interval outside which the data is effectively constant; search
    /// windows for gradients and breaking times use it.
    pub fn feature_window(&self) -> (T, T) {
        self.feature_window
    }

    pub(crate) fn step_data(&self) -> Option<RiemannData<T>> {
        self.step
    }

    /// Sorted discontinuity locations of the initial data.
    pub fn jump_points(&self) -> &[T] {
        &self.jumps
    }

    /// Translate the data: x -> x - a.
    pub fn shifted(&self, a: T) -> InitialProfile<T> {
        let rho = self.rho0.clone();
        let u = self.u0.clone();
        InitialProfile {
            rho0: Arc::new(move |s| rho(s - a)),
            u0: Arc::new(move |s| u(s - a)),
            u0_prime: self.u0_prime.clone().map(|g| {
                Arc::new(move |s| g(s - a)) as Field<T>
            }),
            kind: self.kind,
            density_bound: self.density_bound,
            velocity_bound: self.velocity_bound,
            feature_window: (self.feature_window.0 + a, self.feature_window.1 + a),
            step: None,
            jumps: self.jumps.iter().map(|&b| b + a).collect(),
        }
    }

    /// Galilean boost: u0 -> u0 + c.
    pub fn boosted(&self, c: T) -> InitialProfile<T> {
        let u = self.u0.clone();
        InitialProfile {
            rho0: self.rho0.clone(),
            u0: Arc::new(move |s| u(s) + c),
            u0_prime: self.u0_prime.clone(),
            kind: self.kind,
            density_bound: self.density_bound,
            velocity_bound: self.velocity_bound + c.abs(),
            feature_window: self.feature_window,
            step: None,
            jumps: self.jumps.clone(),
        }
    }

    /// Spatial reflection: rho0 -> rho0(-x), u0 -> -u0(-x).
    pub fn reflected(&self) -> InitialProfile<T> {
        let rho = self.rho0.clone();
        let u = self.u0.clone();
        InitialProfile {
            rho0: Arc::new(move |s| rho(-s)),
            u0: Arc::new(move |s| -u(-s)),
            u0_prime: self.u0_prime.clone().map(|g| {
                Arc::new(move |s: T| g(-s)) as Field<T>
            }),
            kind: self.kind,
            density_bound: self.density_bound,
            velocity_bound: self.velocity_bound,
            feature_window: (-self.feature_window.1, -self.feature_window.0),
            step: None,
            jumps: self.jumps.iter().rev().map(|&b| -b).collect(),
        }
    }
}

/// Step profile from Riemann data. The value at the jump x = 0 is the
/// right state.
pub fn make_riemann_profile<T: Real>(data: RiemannData<T>) -> Result<InitialProfile<T>> {
    data.validate()?;
    let RiemannData { rho1, rho2, u1, u2 } = data;
    let right_rho = rho1 + rho2;
    let right_u = u1 + u2;
    Ok(InitialProfile {
        rho0: Arc::new(move |s| if s < T::zero() { rho1 } else { right_rho }),
        u0: Arc::new(move |s| if s < T::zero() { u1 } else { right_u }),
        u0_prime: None,
        kind: ProfileKind::RiemannStep,
        density_bound: rho1.max(right_rho),
        velocity_bound: u1.abs().max(right_u.abs()),
        feature_window: (-T::one(), T::one()),
        step: Some(data),
        jumps: vec![T::zero()],
    })
}

// Unnormalized standard averaging bump exp(-1/(1-r^2)) on (-1, 1).
fn bump<T: Real>(r: T) -> T {
    let r2 = r * r;
    if r2 < T::one() {
        (-(T::one() / (T::one() - r2))).exp()
    } else {
        T::zero()
    }
}

fn bump_tol<T: Real>() -> QuadTolerance<T> {
    QuadTolerance { rel: T::of(1e-13), abs: T::of(1e-16), max_subdivisions: 400 }
}

/// Half-mass of the unnormalized bump on [0, 1].
fn bump_half_mass<T: Real>() -> Result<T> {
    let out = quad::integrate(|r: T| [bump(r)], &[(T::zero(), T::one())], &bump_tol())?;
    Ok(out.value[0])
}

/// Primitive of the normalized bump: H(-1) = 0, H(0) = 1/2, H(1) = 1,
/// exactly at and beyond the endpoints.
fn bump_cdf<T: Real>(r: T, half_mass: T) -> Result<T> {
    if r <= -T::one() {
        return Ok(T::zero());
    }
    if r >= T::one() {
        return Ok(T::one());
    }
    let half = T::of(0.5);
    if r == T::zero() {
        return Ok(half);
    }
    let (lo, hi, sign) = if r > T::zero() {
        (T::zero(), r, T::one())
    } else {
        (r, T::zero(), -T::one())
    };
    let part = quad::integrate(|y: T| [bump(y)], &[(lo, hi)], &bump_tol())?.value[0];
    let h = half + sign * part / (half_mass + half_mass);
    Ok(h.max(T::zero()).min(T::one()))
}

/// Mollified profile: convolution with the normalized bump of radius
/// epsilon. Step data takes an exact smooth-transition path; C1 data is
/// convolved numerically.
pub fn mollify<T: Real>(
    profile: &InitialProfile<T>,
    cfg: &MollifierConfig<T>,
) -> Result<InitialProfile<T>> {
    let eps = cfg.epsilon;
    if !(eps > T::zero()) {
        return Err(Error::Constraint("mollifier epsilon must be positive".into()));
    }
    if let Some(data) = profile.step_data() {
        return mollify_step(data, eps);
    }
    if !profile.is_c1() {
        return Err(Error::Domain(
            "generic mollification needs a C1 profile; step data lost its exact form".into(),
        ));
    }

    let tol = QuadTolerance::<T> { rel: T::of(1e-12), abs: T::of(1e-15), max_subdivisions: 400 };
    let conv = move |f: Field<T>| -> Field<T> {
        Arc::new(move |x: T| {
            let g = &f;
            let out = quad::integrate(
                move |y: T| {
                    let w = bump(y / eps);
                    [w * g(x - y), w]
                },
                &[(-eps, T::zero()), (T::zero(), eps)],
                &tol,
            )
            .expect("bump convolution of a bounded profile converges");
            out.value[0] / out.value[1]
        })
    };

    let u0_prime = profile
        .u0_prime
        .clone()
        .map(&conv)
        .expect("checked C1 above");
    Ok(InitialProfile {
        rho0: conv(profile.rho0.clone()),
        u0: conv(profile.u0.clone()),
        u0_prime: Some(u0_prime),
        kind: ProfileKind::Mollified,
        density_bound: profile.density_bound,
        velocity_bound: profile.velocity_bound,
        feature_window: (profile.feature_window.0 - eps, profile.feature_window.1 + eps),
        step: None,
        jumps: Vec::new(),
    })
}

fn mollify_step<T: Real>(data: RiemannData<T>, eps: T) -> Result<InitialProfile<T>> {
    let half_mass = bump_half_mass::<T>()?;
    let norm = T::one() / (eps * (half_mass + half_mass));
    let heavy = move |x: T| -> T {
        bump_cdf(x / eps, half_mass).expect("bump cdf over a fixed finite range converges")
    };
    let RiemannData { rho1, rho2, u1, u2 } = data;
    Ok(InitialProfile {
        rho0: Arc::new(move |s| rho1 + rho2 * heavy(s)),
        u0: Arc::new(move |s| u1 + u2 * heavy(s)),
        u0_prime: Some(Arc::new(move |s| u2 * bump(s / eps) * norm)),
        kind: ProfileKind::Mollified,
        density_bound: rho1.max(rho1 + rho2),
        velocity_bound: u1.abs().max((u1 + u2).abs()),
        feature_window: (-T::one() - eps, T::one() + eps),
        step: None,
        jumps: Vec::new(),
    })
}

fn param<T: Real>(params: &BTreeMap<String, f64>, key: &str, default: f64) -> T {
    T::of(params.get(key).copied().unwrap_or(default))
}

fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Constraint(format!(
                "unknown parameter '{key}'; allowed: {}",
                allowed.join(", ")
            )));
        }
    }
    for (key, v) in params {
        if !v.is_finite() {
            return Err(Error::Constraint(format!("parameter '{key}' must be finite")));
        }
    }
    Ok(())
}

/// Fixed registry of analytic test profiles.
///
/// * `constant`: rho0 = rho, u0 = u
/// * `linear-ramp`: rho0 = rho, u0 = -a s (velocity bound declared on
///   |s| <= window)
/// * `tanh-compression`: rho0 = rho, u0 = -a tanh(s)
/// * `gaussian-bump`: rho0 = amp exp(-(s-center)^2 / (2 width^2)),
///   u0 = -u_amp tanh(s)
/// * `sine`: rho0 = rho, u0 = a sin(k s)
pub fn analytic_profile<T: Real>(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<InitialProfile<T>> {
    let two = T::of(2.0);
    match name {
        "constant" => {
            check_keys(params, &["rho", "u"])?;
            let rho = param::<T>(params, "rho", 1.0);
            let u = param::<T>(params, "u", 0.0);
            if rho < T::zero() {
                return Err(Error::Constraint("constant: rho must be nonnegative".into()));
            }
            Ok(InitialProfile {
                rho0: Arc::new(move |_| rho),
                u0: Arc::new(move |_| u),
                u0_prime: Some(Arc::new(|_| T::zero())),
                kind: ProfileKind::Analytic,
                density_bound: rho,
                velocity_bound: u.abs(),
                feature_window: (-T::one(), T::one()),
                step: None,
                jumps: Vec::new(),
            })
        }
        "linear-ramp" => {
            check_keys(params, &["a", "rho", "window"])?;
            let a = param::<T>(params, "a", 1.0);
            let rho = param::<T>(params, "rho", 1.0);
            let window = param::<T>(params, "window", 10.0);
            if rho < T::zero() {
                return Err(Error::Constraint("linear-ramp: rho must be nonnegative".into()));
            }
            if !(window > T::zero()) {
                return Err(Error::Constraint("linear-ramp: window must be positive".into()));
            }
            Ok(InitialProfile {
                rho0: Arc::new(move |_| rho),
                u0: Arc::new(move |s| -a * s),
                u0_prime: Some(Arc::new(move |_| -a)),
                kind: ProfileKind::Analytic,
                density_bound: rho,
                velocity_bound: a.abs() * window,
                feature_window: (-window, window),
                step: None,
                jumps: Vec::new(),
            })
        }
        "tanh-compression" => {
            check_keys(params, &["a", "rho"])?;
            let a = param::<T>(params, "a", 1.0);
            let rho = param::<T>(params, "rho", 1.0);
            if rho < T::zero() {
                return Err(Error::Constraint("tanh-compression: rho must be nonnegative".into()));
            }
            Ok(InitialProfile {
                rho0: Arc::new(move |_| rho),
                u0: Arc::new(move |s| -a * s.tanh()),
                u0_prime: Some(Arc::new(move |s| {
                    let sech = T::one() / s.cosh();
                    -a * sech * sech
                })),
                kind: ProfileKind::Analytic,
                density_bound: rho,
                velocity_bound: a.abs(),
                feature_window: (-T::of(12.0), T::of(12.0)),
                step: None,
                jumps: Vec::new(),
            })
        }
        "gaussian-bump" => {
            check_keys(params, &["amp", "width", "center", "u_amp"])?;
            let amp = param::<T>(params, "amp", 1.0);
            let width = param::<T>(params, "width", 1.0);
            let center = param::<T>(params, "center", 0.0);
            let u_amp = param::<T>(params, "u_amp", 0.0);
            if amp < T::zero() {
                return Err(Error::Constraint("gaussian-bump: amp must be nonnegative".into()));
            }
            if !(width > T::zero()) {
                return Err(Error::Constraint("gaussian-bump: width must be positive".into()));
            }
            let reach = T::of(12.0) * width;
            Ok(InitialProfile {
                rho0: Arc::new(move |s| {
                    let z = (s - center) / width;
                    amp * (-z * z / two).exp()
                }),
                u0: Arc::new(move |s| -u_amp * s.tanh()),
                u0_prime: Some(Arc::new(move |s| {
                    let sech = T::one() / s.cosh();
                    -u_amp * sech * sech
                })),
                kind: ProfileKind::Analytic,
                density_bound: amp,
                velocity_bound: u_amp.abs(),
                feature_window: ((center - reach).min(-T::of(12.0)), (center + reach).max(T::of(12.0))),
                step: None,
                jumps: Vec::new(),
            })
        }
        "sine" => {
            check_keys(params, &["a", "k", "rho"])?;
            let a = param::<T>(params, "a", 1.0);
            let k = param::<T>(params, "k", 1.0);
            let rho = param::<T>(params, "rho", 1.0);
            if rho < T::zero() {
                return Err(Error::Constraint("sine: rho must be nonnegative".into()));
            }
            if k == T::zero() {
                return Err(Error::Constraint("sine: k must be nonzero".into()));
            }
            let period = T::PI() / k.abs();
            Ok(InitialProfile {
                rho0: Arc::new(move |_| rho),
                u0: Arc::new(move |s| a * (k * s).sin()),
                u0_prime: Some(Arc::new(move |s| a * k * (k * s).cos())),
                kind: ProfileKind::Analytic,
                density_bound: rho,
                velocity_bound: a.abs(),
                feature_window: (-period, period),
                step: None,
                jumps: Vec::new(),
            })
        }
        other => Err(Error::Constraint(format!(
            "unknown profile '{other}'; known: constant, linear-ramp, tanh-compression, gaussian-bump, sine"
        ))),
    }
}
