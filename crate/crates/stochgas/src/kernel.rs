//! Closed-form kernel fields of the stochastically perturbed system: the
//! joint density P(t, x, u), the marginal density rho_sigma, the mean
//! velocity u_sigma and the spurious pressure pi_sigma, all evaluated by
//! stabilized adaptive quadrature over the starting position s.
//!
//! The time-t law of one particle started at (s, u0(s)) is Gaussian with
//! mean (s + u0(s) t, u0(s)) and covariance
//!
//! ```text
//! [ sigma1^2 t + sigma2^2 t^3 / 3    sigma2^2 t^2 / 2 ]
//! [ sigma2^2 t^2 / 2                 sigma2^2 t       ]
//! ```
//!
//! so every field is a rho0-weighted mixture over s. All exponents are
//! kept in log form and shifted by their maximum before exponentiation;
//! the integration domain is the union of intervals where the positional
//! log-weight stays within `exp_cutoff` of that maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::InitialProfile;
use crate::quad::{self, QuadOutcome, QuadTolerance};
use crate::scalar::Real;
use crate::scan::{polish_root, GridScan};

/// Perturbation amplitudes (sigma1, sigma2); |sigma| != 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPair<T> {
    sigma1: T,
    sigma2: T,
}

impl<T: Real> SigmaPair<T> {
    pub fn new(sigma1: T, sigma2: T) -> Result<Self> {
        if !(sigma1 >= T::zero()) || !(sigma2 >= T::zero()) {
            return Err(Error::Constraint("sigma components must be nonnegative".into()));
        }
        if !(sigma1 * sigma1 + sigma2 * sigma2 > T::zero()) {
            return Err(Error::Constraint("|sigma| must be nonzero".into()));
        }
        if !sigma1.is_finite() || !sigma2.is_finite() {
            return Err(Error::Constraint("sigma components must be finite".into()));
        }
        Ok(SigmaPair { sigma1, sigma2 })
    }

    pub fn sigma1(&self) -> T {
        self.sigma1
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    /// Both components scaled together, for sigma -> 0 sweeps.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        SigmaPair::new(self.sigma1 * factor, self.sigma2 * factor)
    }
}

/// Quadrature error targets and the log-weight truncation threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Integrate only where the positional log-weight is within this of
    /// its maximum; exp(-50) is far below every default tolerance.
    pub exp_cutoff: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: T::of(1e-9),
            abs_tol: T::of(1e-12),
            exp_cutoff: T::of(50.0),
            max_subdivisions: 4000,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return Err(Error::Constraint("quadrature tolerances must be positive".into()));
        }
        if !(self.exp_cutoff > T::zero()) {
            return Err(Error::Constraint("exp_cutoff must be positive".into()));
        }
        Ok(())
    }

    fn tolerance(&self) -> QuadTolerance<T> {
        QuadTolerance { rel: self.rel_tol, abs: self.abs_tol, max_subdivisions: self.max_subdivisions }
    }
}

/// Field values at one spacetime point with a quadrature error indicator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FieldSample<T> {
    pub t: T,
    pub x: T,
    pub rho: T,
    pub u: T,
    pub pi: T,
    /// Combined relative quadrature error bound over the three fields.
    pub err_estimate: T,
}

/// Derived Gaussian quantities at fixed (t, sigma).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry<T> {
    /// Var X = t (3 sigma1^2 + sigma2^2 t^2) / 3.
    pub var_x: T,
    /// Cov(X,U)/Var X = 3 sigma2^2 t / (2 (3 sigma1^2 + sigma2^2 t^2)).
    pub slope: T,
    /// Var(U|X) = sigma2^2 t (12 sigma1^2 + sigma2^2 t^2) / (4 (3 sigma1^2 + sigma2^2 t^2)).
    pub cond_var: T,
}

impl<T: Real> Geometry<T> {
    pub fn new(t: T, sigma: &SigmaPair<T>) -> Self {
        let three = T::of(3.0);
        let s1q = sigma.sigma1 * sigma.sigma1;
        let s2q = sigma.sigma2 * sigma.sigma2;
        let q = three * s1q + s2q * t * t;
        Geometry {
            var_x: t * q / three,
            slope: three * s2q * t / (q + q),
            cond_var: s2q * t * (T::of(12.0) * s1q + s2q * t * t) / (T::of(4.0) * q),
        }
    }

    /// Conditional mean of U given X = x for the stream started at s;
    /// g is the characteristic residual u0(s) t + s - x.
    fn cond_mean(&self, u0: T, g: T) -> T {
        u0 - self.slope * g
    }
}

/// Integration domain for one (t, x): intervals where the positional
/// log-weight is within the cutoff of its maximum, plus the candidate
/// peaks (used to seed u-windows downstream).
pub(crate) struct Truncation<T> {
    pub segments: Vec<(T, T)>,
    pub shift: T,
    pub peaks: Vec<T>,
}

fn vacuum_floor<T: Real>() -> T {
    T::from_f64(1e-300).unwrap_or_else(T::zero)
}

fn safe_exp<T: Real>(arg: T) -> T {
    arg.min(T::of(500.0)).exp()
}

pub(crate) fn truncate<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    geom: &Geometry<T>,
    cfg: &QuadratureConfig<T>,
) -> Truncation<T> {
    let a = geom.var_x;
    let two_a = a + a;
    let log_w = |s: T, g: T| -> T {
        let _ = s;
        -(g * g) / two_a
    };
    let gaussian_reach = (two_a * cfg.exp_cutoff).sqrt();
    let margin = T::one() + gaussian_reach;
    let reach = t * profile.velocity_bound() + margin;
    let (lo, hi) = (x - reach, x + reach);

    let mut g = |s: T| profile.u0(s) * t + s - x;
    let grid = GridScan::new(&mut g, lo, hi, 1000);

    // candidate maxima of the exponent: polished roots of g, plus local
    // minima of |g| (near-miss bumps, jump points of step data)
    let mut candidates: Vec<T> = Vec::new();
    for bracket in grid.sign_change_brackets() {
        let scale = T::one() + x.abs() + t * profile.velocity_bound();
        candidates.push(polish_root(&mut g, None, bracket, T::of(1e-12) * scale, 120));
    }
    for node in grid.abs_minima() {
        let cell = (hi - lo) / T::of(1000.0);
        candidates.push(golden_abs_min(&mut g, node - cell, node + cell));
    }
    candidates.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    candidates.dedup_by(|p, q| (*p - *q).abs() <= T::epsilon() * (p.abs() + q.abs() + T::one()));

    let mut shift = T::neg_infinity();
    let mut scored: Vec<(T, T)> = Vec::with_capacity(candidates.len());
    for &c in &candidates {
        let lw = log_w(c, g(c));
        scored.push((c, lw));
        if lw > shift {
            shift = lw;
        }
    }
    let threshold = shift - cfg.exp_cutoff;

    let step = gaussian_reach.max((hi - lo) * T::of(1e-3));
    let mut raw: Vec<(T, T)> = Vec::new();
    let mut peaks: Vec<T> = Vec::new();
    for &(c, lw) in &scored {
        if lw < threshold {
            continue;
        }
        peaks.push(c);
        let left = expand_edge(&mut g, &log_w, c, -step, lo, threshold);
        let right = expand_edge(&mut g, &log_w, c, step, hi, threshold);
        raw.push((left, right));
    }
    raw.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut segments: Vec<(T, T)> = Vec::new();
    for (a0, b0) in raw {
        match segments.last_mut() {
            Some(last) if a0 <= last.1 => last.1 = last.1.max(b0),
            _ => segments.push((a0, b0)),
        }
    }
    // split at data discontinuities: a node set straddling a jump makes
    // the embedded error estimate unreliable and turns the integral into
    // a staircase function of x
    let jumps = profile.jump_points();
    if !jumps.is_empty() {
        let mut split: Vec<(T, T)> = Vec::with_capacity(segments.len() + jumps.len());
        for (a0, b0) in segments {
            let mut lo = a0;
            for &j in jumps {
                if j > lo && j < b0 {
                    split.push((lo, j));
                    lo = j;
                }
            }
            split.push((lo, b0));
        }
        segments = split;
    }
    Truncation { segments, shift, peaks }
}

// Tracks the best evaluated point rather than the bracket midpoint: on a
// data jump |g| is discontinuous and the midpoint can land on the wrong
// side, hiding a whole stream bump from the candidate list.
fn golden_abs_min<T: Real>(g: &mut dyn FnMut(T) -> T, mut a: T, mut b: T) -> T {
    let inv_phi = T::of(0.618_033_988_749_894_9);
    let mut best_s = a;
    let mut best = g(a).abs();
    let at_b = g(b).abs();
    if at_b < best {
        best = at_b;
        best_s = b;
    }
    for _ in 0..48 {
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        let vc = g(c).abs();
        let vd = g(d).abs();
        if vc < best {
            best = vc;
            best_s = c;
        }
        if vd < best {
            best = vd;
            best_s = d;
        }
        if vc < vd {
            b = d;
        } else {
            a = c;
        }
    }
    best_s
}

/// March outward from a peak until the log-weight drops below the
/// threshold, then bisect the crossing; returns the outer edge.
fn expand_edge<T: Real>(
    g: &mut dyn FnMut(T) -> T,
    log_w: &dyn Fn(T, T) -> T,
    start: T,
    step: T,
    limit: T,
    threshold: T,
) -> T {
    let outward = |p: T| if step > T::zero() { p.min(limit) } else { p.max(limit) };
    let mut inner = start;
    let mut probe = outward(start + step);
    let max_steps = 200;
    for _ in 0..max_steps {
        if log_w(probe, g(probe)) < threshold {
            break;
        }
        if probe == limit {
            return limit;
        }
        inner = probe;
        probe = outward(probe + step);
    }
    // bisect between the last in-threshold point and the first below it
    let mut above = inner;
    let mut below = probe;
    for _ in 0..20 {
        let mid = (above + below) * T::of(0.5);
        if log_w(mid, g(mid)) >= threshold {
            above = mid;
        } else {
            below = mid;
        }
    }
    below
}

fn exp_scaled<T: Real>(shift: T, v: T) -> T {
    if v == T::zero() || shift == T::zero() {
        v
    } else {
        v.signum() * safe_exp(shift + v.abs().ln())
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("fields need t >= 0, got {t}")));
    }
    Ok(())
}

struct Pass1<T> {
    geom: Geometry<T>,
    trunc: Truncation<T>,
    norm: T,
    out: QuadOutcome<T, 2>,
}

/// Shared first pass: [mass, momentum] moments of the positional weight.
fn pass1<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<Pass1<T>> {
    cfg.validate()?;
    let geom = Geometry::new(t, sigma);
    let trunc = truncate(t, x, profile, &geom, cfg);
    let a = geom.var_x;
    let two_a = a + a;
    let shift = trunc.shift;
    let out = quad::integrate(
        |s: T| {
            let u0 = profile.u0(s);
            let g = u0 * t + s - x;
            let w = profile.rho0(s) * safe_exp(-(g * g) / two_a - shift);
            [w, w * geom.cond_mean(u0, g)]
        },
        &trunc.segments,
        &cfg.tolerance(),
    )?;
    let norm = (T::of(2.0) * T::PI() * a).sqrt().recip();
    Ok(Pass1 { geom, trunc, norm, out })
}

/// Marginal density rho_sigma(t, x); rho0(x) at t = 0.
pub fn rho_sigma<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(profile.rho0(x));
    }
    let p = pass1(t, x, profile, sigma, cfg)?;
    Ok(p.norm * exp_scaled(p.trunc.shift, p.out.value[0]))
}

/// Mean velocity u_sigma(t, x); u0(x) at t = 0. Underflowing mass is a
/// vacuum error, distinct from quadrature tolerance failures.
pub fn u_sigma<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(profile.u0(x));
    }
    let p = pass1(t, x, profile, sigma, cfg)?;
    let rho = p.norm * exp_scaled(p.trunc.shift, p.out.value[0]);
    if !(rho > vacuum_floor::<T>()) {
        return Err(Error::Vacuum {
            t: t.as_f64(),
            x: x.as_f64(),
            mass: rho.as_f64(),
            floor: vacuum_floor::<T>().as_f64(),
        });
    }
    Ok(p.out.value[1] / p.out.value[0])
}

/// Momentum density rho_sigma u_sigma in a single pass; well-defined in
/// near-vacuum tails where the ratio form is not.
pub fn momentum_density<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(profile.rho0(x) * profile.u0(x));
    }
    let p = pass1(t, x, profile, sigma, cfg)?;
    Ok(p.norm * exp_scaled(p.trunc.shift, p.out.value[1]))
}

/// Spurious pressure pi_sigma(t, x) = integral of (u - u_sigma)^2 P du,
/// computed as one s-quadrature of [conditional variance +
/// (conditional mean - u_sigma)^2] against the positional weight.
pub fn spurious_pressure<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    Ok(field_sample(t, x, profile, sigma, cfg)?.pi)
}

/// All three fields at one point, sharing the candidate scan and the
/// mass/momentum pass.
pub fn field_sample<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<FieldSample<T>> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(FieldSample {
            t,
            x,
            rho: profile.rho0(x),
            u: profile.u0(x),
            pi: T::zero(),
            err_estimate: T::zero(),
        });
    }
    let p = pass1(t, x, profile, sigma, cfg)?;
    let scale = p.norm * safe_exp(p.trunc.shift);
    let rho = p.norm * exp_scaled(p.trunc.shift, p.out.value[0]);
    if !(rho > vacuum_floor::<T>()) {
        return Err(Error::Vacuum {
            t: t.as_f64(),
            x: x.as_f64(),
            mass: rho.as_f64(),
            floor: vacuum_floor::<T>().as_f64(),
        });
    }
    let u = p.out.value[1] / p.out.value[0];

    let geom = p.geom;
    let a = geom.var_x;
    let two_a = a + a;
    let shift = p.trunc.shift;
    let pi_pass = quad::integrate(
        |s: T| {
            let u0 = profile.u0(s);
            let g = u0 * t + s - x;
            let w = profile.rho0(s) * safe_exp(-(g * g) / two_a - shift);
            let dev = geom.cond_mean(u0, g) - u;
            [w * (geom.cond_var + dev * dev)]
        },
        &p.trunc.segments,
        &cfg.tolerance(),
    )?;
    let pi = p.norm * exp_scaled(shift, pi_pass.value[0]);

    let err_rho = scale * p.out.error[0];
    let err_u = (p.out.error[1] + u.abs() * p.out.error[0]) / p.out.value[0];
    let err_pi = scale * pi_pass.error[0];
    let err_estimate = (err_rho / rho)
        .max(err_u / (T::one() + u.abs()))
        .max(err_pi / pi.max(cfg.abs_tol));

    Ok(FieldSample { t, x, rho, u, pi, err_estimate })
}

/// Mass and momentum density (rho_sigma, rho_sigma u_sigma) in one pass,
/// with absolute error bounds; the pair shares one subdivision tree and
/// one log-weight normalization.
pub fn mass_and_momentum<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<([T; 2], [T; 2])> {
    check_time(t)?;
    if t == T::zero() {
        let rho = profile.rho0(x);
        return Ok(([rho, rho * profile.u0(x)], [T::zero(), T::zero()]));
    }
    let p = pass1(t, x, profile, sigma, cfg)?;
    let scale = p.norm * safe_exp(p.trunc.shift);
    Ok((
        [
            p.norm * exp_scaled(p.trunc.shift, p.out.value[0]),
            p.norm * exp_scaled(p.trunc.shift, p.out.value[1]),
        ],
        [scale * p.out.error[0], scale * p.out.error[1]],
    ))
}

/// Joint density P(t, x, u). Needs t > 0 and sigma2 > 0: with sigma2 = 0
/// the law is a delta in u (the marginals stay available).
pub fn joint_density<T: Real>(
    t: T,
    x: T,
    u: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    cfg.validate()?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("joint density needs t > 0, got {t}")));
    }
    if !(sigma.sigma2 > T::zero()) {
        return Err(Error::Domain(
            "joint density needs sigma2 > 0: the velocity law is degenerate".into(),
        ));
    }
    let geom = Geometry::new(t, sigma);
    let trunc = truncate(t, x, profile, &geom, cfg);
    let a = geom.var_x;
    let v = geom.cond_var;
    let two_a = a + a;
    let two_v = v + v;

    let log_l = |s: T| -> T {
        let u0 = profile.u0(s);
        let g = u0 * t + s - x;
        let du = u - geom.cond_mean(u0, g);
        -(g * g) / two_a - du * du / two_v
    };

    // re-shift by the combined exponent at the positional peaks and at
    // the best u-match inside each segment
    let mut shift = T::neg_infinity();
    for &c in &trunc.peaks {
        shift = shift.max(log_l(c));
    }
    for &(lo, hi) in &trunc.segments {
        let mut match_u = |s: T| {
            let u0 = profile.u0(s);
            let g = u0 * t + s - x;
            u - geom.cond_mean(u0, g)
        };
        let grid = GridScan::new(&mut match_u, lo, hi, 64);
        for bracket in grid.sign_change_brackets() {
            let s = polish_root(&mut match_u, None, bracket, T::of(1e-10), 80);
            shift = shift.max(log_l(s));
        }
    }
    if shift == T::neg_infinity() {
        shift = T::zero();
    }

    let out = quad::integrate(
        |s: T| [profile.rho0(s) * safe_exp(log_l(s) - shift)],
        &trunc.segments,
        &cfg.tolerance(),
    )?;
    let norm = (T::of(2.0) * T::PI() * (a * v).sqrt()).recip();
    Ok(norm * exp_scaled(shift, out.value[0]))
}

/// Velocity window and interior breakpoints covering the effective
/// support of P(t, x, .) for u-quadratures.
pub(crate) fn u_support<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<(T, T, Vec<T>)> {
    let geom = Geometry::new(t, sigma);
    let trunc = truncate(t, x, profile, &geom, cfg);
    let mut centers: Vec<T> = Vec::new();
    let mut probe = |s: T| {
        let u0 = profile.u0(s);
        let g = u0 * t + s - x;
        centers.push(geom.cond_mean(u0, g));
    };
    for &c in &trunc.peaks {
        probe(c);
    }
    for &(lo, hi) in &trunc.segments {
        probe(lo);
        probe(hi);
    }
    if centers.is_empty() {
        return Err(Error::EmptyFan { t: t.as_f64(), x: x.as_f64() });
    }
    centers.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    let spread = ((geom.cond_var + geom.cond_var) * cfg.exp_cutoff).sqrt() + T::of(4.0) * geom.cond_var.sqrt();
    let lo = centers[0] - spread;
    let hi = centers[centers.len() - 1] + spread;
    centers.dedup_by(|p, q| (*p - *q).abs() <= T::of(1e-12) * (p.abs() + q.abs() + T::one()));
    Ok((lo, hi, centers))
}
