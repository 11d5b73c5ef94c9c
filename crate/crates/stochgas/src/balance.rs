//! Verification of the viscous balance laws satisfied by the kernel
//! fields:
//!
//! ```text
//! d rho/dt + d(rho u)/dx             = sigma1^2/2 d^2 rho/dx^2
//! d(rho u)/dt + d(rho u^2 + pi)/dx   = sigma1^2/2 d^2(rho u)/dx^2
//! ```
//!
//! using the identity I_sigma = d pi/dx for the integral term (valid
//! because the first central velocity moment vanishes), which is itself
//! checked here by direct u-quadrature rather than assumed. Residuals are
//! centered second-order finite differences of kernel-evaluated fields
//! with h_t = h_x; both right-hand sides being divergences, the window
//! totals of mass and momentum are conserved.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{self, QuadratureConfig, SigmaPair};
use crate::profiles::InitialProfile;
use crate::quad::{self, QuadTolerance};
use crate::scalar::Real;

/// Space-time lattice: nodes t0 + i h, x0 + j h (h_t = h_x by design;
/// the residuals are evaluation-only, no CFL constraint applies).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub t0: T,
    pub t1: T,
    pub x0: T,
    pub x1: T,
    pub h: T,
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > T::zero()) {
            return Err(Error::Constraint("grid step must be positive".into()));
        }
        if !(self.t0 > T::zero()) {
            return Err(Error::Constraint(
                "grid must stay away from t = 0 (fields are smooth for t > 0)".into(),
            ));
        }
        let two_h = self.h + self.h;
        if !(self.t1 >= self.t0 + two_h) || !(self.x1 >= self.x0 + two_h) {
            return Err(Error::Constraint("grid needs at least three nodes per direction".into()));
        }
        Ok(())
    }

    fn t_nodes(&self) -> Vec<T> {
        nodes(self.t0, self.t1, self.h)
    }

    fn x_nodes(&self) -> Vec<T> {
        nodes(self.x0, self.x1, self.h)
    }
}

fn nodes<T: Real>(lo: T, hi: T, h: T) -> Vec<T> {
    let count = ((hi - lo) / h + T::of(0.5)).to_usize().unwrap_or(0);
    (0..=count).map(|i| lo + h * T::from_usize(i).unwrap()).collect()
}

/// Max and root-mean-square over the interior lattice nodes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms<T> {
    pub max_abs: T,
    pub rms: T,
}

fn reduce_norms<T: Real>(residuals: &[T]) -> Norms<T> {
    let mut max_abs = T::zero();
    let mut sum_sq = T::zero();
    for &r in residuals {
        max_abs = max_abs.max(r.abs());
        sum_sq += r * r;
    }
    let rms = if residuals.is_empty() {
        T::zero()
    } else {
        (sum_sq / T::from_usize(residuals.len()).unwrap()).sqrt()
    };
    Norms { max_abs, rms }
}

/// The two residual error sources: O(h^2) truncation of the centered
/// stencils and quadrature noise amplified by the stencils.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorBudget<T> {
    pub h: T,
    /// Truncation scale h^2 (problem-dependent derivative factors apply).
    pub fd_term: T,
    /// (abs_tol + rel_tol) * (2/h + 2 sigma1^2 / h^2).
    pub quad_term: T,
}

impl<T: Real> ErrorBudget<T> {
    pub fn new(h: T, sigma: &SigmaPair<T>, cfg: &QuadratureConfig<T>) -> Self {
        let eps = cfg.abs_tol + cfg.rel_tol;
        let two = T::of(2.0);
        let s1q = sigma.sigma1() * sigma.sigma1();
        ErrorBudget { h, fd_term: h * h, quad_term: eps * (two / h + two * s1q / (h * h)) }
    }
}

/// Collected verification results, serialized by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport<T> {
    pub grid: GridSpec<T>,
    pub continuity: Norms<T>,
    pub momentum: Norms<T>,
    pub i_sigma_check: Option<T>,
    pub totals: Option<Totals<T>>,
    pub budget: ErrorBudget<T>,
}

/// Pointwise residuals on the interior nodes, for plot output.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualGrid<T> {
    pub t: Vec<T>,
    pub x: Vec<T>,
    /// Row-major [t][x] over interior nodes.
    pub continuity: Vec<T>,
    pub momentum: Vec<T>,
}

fn eval_lattice<T: Real>(
    ts: &[T],
    xs: &[T],
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
    need_pressure: bool,
) -> Result<Vec<[T; 3]>> {
    let nx = xs.len();
    (0..ts.len() * nx)
        .into_par_iter()
        .map(|idx| {
            let t = ts[idx / nx];
            let x = xs[idx % nx];
            if need_pressure {
                let s = kernel::field_sample(t, x, profile, sigma, cfg)?;
                Ok([s.rho, s.rho * s.u, s.pi])
            } else {
                let (v, _) = kernel::mass_and_momentum(t, x, profile, sigma, cfg)?;
                Ok([v[0], v[1], T::zero()])
            }
        })
        .collect()
}

fn interior_residuals<T: Real>(
    grid: &GridSpec<T>,
    fields: &[[T; 3]],
    nx: usize,
    nt: usize,
    sigma: &SigmaPair<T>,
    momentum_form: bool,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let h = grid.h;
    let two_h = h + h;
    let h_sq = h * h;
    let half_s1q = T::of(0.5) * sigma.sigma1() * sigma.sigma1();
    let at = |i: usize, j: usize| fields[i * nx + j];
    let mut out = Vec::with_capacity((nt - 2) * (nx - 2));
    let mut t_list = Vec::with_capacity(nt - 2);
    let mut x_list = Vec::with_capacity(nx - 2);
    for i in 1..nt - 1 {
        t_list.push(grid.t0 + h * T::from_usize(i).unwrap());
        for j in 1..nx - 1 {
            if i == 1 {
                x_list.push(grid.x0 + h * T::from_usize(j).unwrap());
            }
            let r = if momentum_form {
                // field component 1 = rho u; flux = rho u^2 = (rho u)^2 / rho
                let flux =
                    |f: [T; 3]| -> T { f[1] * f[1] / f[0] };
                let dt = (at(i + 1, j)[1] - at(i - 1, j)[1]) / two_h;
                let dx_flux = (flux(at(i, j + 1)) - flux(at(i, j - 1))) / two_h;
                let dx_pi = (at(i, j + 1)[2] - at(i, j - 1)[2]) / two_h;
                let diff = (at(i, j + 1)[1] - (at(i, j)[1] + at(i, j)[1]) + at(i, j - 1)[1]) / h_sq;
                dt + dx_flux + dx_pi - half_s1q * diff
            } else {
                let dt = (at(i + 1, j)[0] - at(i - 1, j)[0]) / two_h;
                let dx = (at(i, j + 1)[1] - at(i, j - 1)[1]) / two_h;
                let diff = (at(i, j + 1)[0] - (at(i, j)[0] + at(i, j)[0]) + at(i, j - 1)[0]) / h_sq;
                dt + dx - half_s1q * diff
            };
            out.push(r);
        }
    }
    (out, t_list, x_list)
}

/// Residual of the mass balance on the interior of the grid.
pub fn residual_continuity<T: Real>(
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    grid: &GridSpec<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<Norms<T>> {
    Ok(reduce_norms(&continuity_grid(profile, sigma, grid, cfg)?.continuity))
}

/// Residual of the momentum balance (with I_sigma = d pi/dx) on the
/// interior of the grid.
pub fn residual_momentum<T: Real>(
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    grid: &GridSpec<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<Norms<T>> {
    Ok(reduce_norms(&momentum_grid(profile, sigma, grid, cfg)?.momentum))
}

/// Pointwise continuity residuals (momentum slots zeroed).
pub fn continuity_grid<T: Real>(
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    grid: &GridSpec<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<ResidualGrid<T>> {
    grid.validate()?;
    let ts = grid.t_nodes();
    let xs = grid.x_nodes();
    let fields = eval_lattice(&ts, &xs, profile, sigma, cfg, false)?;
    let (res, t_list, x_list) = interior_residuals(grid, &fields, xs.len(), ts.len(), sigma, false);
    let zeros = vec![T::zero(); res.len()];
    Ok(ResidualGrid { t: t_list, x: x_list, continuity: res, momentum: zeros })
}

/// Pointwise residuals of both balances on one shared lattice.
pub fn momentum_grid<T: Real>(
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    grid: &GridSpec<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<ResidualGrid<T>> {
    grid.validate()?;
    let ts = grid.t_nodes();
    let xs = grid.x_nodes();
    let fields = eval_lattice(&ts, &xs, profile, sigma, cfg, true)?;
    let (mom, t_list, x_list) = interior_residuals(grid, &fields, xs.len(), ts.len(), sigma, true);
    let (cont, _, _) = interior_residuals(grid, &fields, xs.len(), ts.len(), sigma, false);
    Ok(ResidualGrid { t: t_list, x: x_list, continuity: cont, momentum: mom })
}

/// I_sigma by direct u-quadrature of (u - u_sigma)^2 d_x P with d_x P by
/// centered differencing of the joint density. Needs sigma2 > 0.
pub fn i_sigma_direct<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
    fd_step: T,
) -> Result<T> {
    if !(sigma.sigma2() > T::zero()) {
        return Err(Error::Domain("I_sigma needs sigma2 > 0 (joint density required)".into()));
    }
    if !(fd_step > T::zero()) {
        return Err(Error::Constraint("fd_step must be positive".into()));
    }
    let u_center = kernel::u_sigma(t, x, profile, sigma, cfg)?;
    let (lo, hi, centers) = kernel::u_support(t, x, profile, sigma, cfg)?;
    let mut segments = Vec::with_capacity(centers.len() + 1);
    let mut prev = lo;
    for &c in &centers {
        if c > prev && c < hi {
            segments.push((prev, c));
            prev = c;
        }
    }
    segments.push((prev, hi));

    let two_step = fd_step + fd_step;
    let out = quad::integrate(
        |u: T| {
            let plus = kernel::joint_density(t, x + fd_step, u, profile, sigma, cfg)
                .expect("joint density on a shifted point");
            let minus = kernel::joint_density(t, x - fd_step, u, profile, sigma, cfg)
                .expect("joint density on a shifted point");
            let dev = u - u_center;
            [dev * dev * (plus - minus) / two_step]
        },
        &segments,
        &QuadTolerance { rel: cfg.rel_tol.max(T::of(1e-8)), abs: cfg.abs_tol, max_subdivisions: cfg.max_subdivisions },
    )?;
    Ok(out.value[0])
}

/// Outcome of the integration-by-parts identity check I_sigma = d pi/dx.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck<T> {
    pub i_direct: T,
    pub dpi_dx: T,
    pub gap: T,
    /// Pinned budget: 10 h^2 (pi'''/6 + |rho'| u'^2) + propagated
    /// quadrature bounds + 1e-9 (1 + |dpi/dx|).
    pub tol: T,
}

/// Compare I_sigma (direct) against the centered difference of pi at the
/// same step, with an explicit two-term error budget.
pub fn i_sigma_identity<T: Real>(
    t: T,
    x: T,
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    cfg: &QuadratureConfig<T>,
    fd_step: T,
) -> Result<IdentityCheck<T>> {
    let h = fd_step;
    let sample = |xx: T| kernel::field_sample(t, xx, profile, sigma, cfg);
    let m2 = sample(x - h - h)?;
    let m1 = sample(x - h)?;
    let p1 = sample(x + h)?;
    let p2 = sample(x + h + h)?;
    let center = sample(x)?;

    let two_h = h + h;
    let dpi_dx = (p1.pi - m1.pi) / two_h;
    let third = (p2.pi - (p1.pi + p1.pi) + (m1.pi + m1.pi) - m2.pi).abs() / (two_h * h * h);
    let rho_slope = ((p1.rho - m1.rho) / two_h).abs();
    let u_slope = (p1.u - m1.u) / two_h;

    let i_direct = i_sigma_direct(t, x, profile, sigma, cfg, h)?;
    let gap = (i_direct - dpi_dx).abs();

    let six = T::of(6.0);
    let quad_pi = (p1.err_estimate.max(m1.err_estimate)) * (p1.pi.abs().max(m1.pi.abs()) + cfg.abs_tol);
    let quad_term = quad_pi / h + (cfg.rel_tol * center.pi.abs() + cfg.abs_tol) / h;
    let tol = T::of(10.0) * h * h * (third / six + rho_slope * u_slope * u_slope)
        + quad_term
        + T::of(1e-9) * (T::one() + dpi_dx.abs());
    Ok(IdentityCheck { i_direct, dpi_dx, gap, tol })
}

/// Window totals of mass and momentum at the requested times.
#[derive(Debug, Clone, Serialize)]
pub struct Totals<T> {
    pub t: Vec<T>,
    pub mass: Vec<T>,
    pub momentum: Vec<T>,
}

/// Integrate rho_sigma and rho_sigma u_sigma over the window at each
/// time; the window must effectively contain the initial mass (probe
/// strips of width 10 on both sides must carry < 1e-12 relative mass).
pub fn conserved_totals<T: Real>(
    profile: &InitialProfile<T>,
    sigma: &SigmaPair<T>,
    window: (T, T),
    t_list: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<Totals<T>> {
    let (x0, x1) = window;
    if !(x1 > x0) {
        return Err(Error::Window("window must be ordered".into()));
    }
    let probe_tol = QuadTolerance { rel: T::of(1e-6), abs: T::of(1e-16), max_subdivisions: 2000 };
    let strip = T::of(10.0);
    let inside =
        quad::integrate(|s: T| [profile.rho0(s)], &[(x0, x1)], &probe_tol)?.value[0];
    let tails = quad::integrate(
        |s: T| [profile.rho0(s)],
        &[(x0 - strip, x0), (x1, x1 + strip)],
        &probe_tol,
    )?
    .value[0];
    if tails > T::of(1e-12) * inside.max(T::one()) {
        return Err(Error::Window(format!(
            "rho0 is not supported inside the window: probe-strip mass {:e}",
            tails.as_f64()
        )));
    }

    let quad_tol = QuadTolerance { rel: cfg.rel_tol, abs: cfg.abs_tol, max_subdivisions: cfg.max_subdivisions };
    let mut mass = Vec::with_capacity(t_list.len());
    let mut momentum = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t >= T::zero()) {
            return Err(Error::Domain(format!("totals need t >= 0, got {t}")));
        }
        let out = if t == T::zero() {
            let mut segments = Vec::new();
            let mut lo = x0;
            for &j in profile.jump_points() {
                if j > lo && j < x1 {
                    segments.push((lo, j));
                    lo = j;
                }
            }
            segments.push((lo, x1));
            quad::integrate(
                |s: T| {
                    let rho = profile.rho0(s);
                    [rho, rho * profile.u0(s)]
                },
                &segments,
                &quad_tol,
            )?
        } else {
            quad::integrate(
                |x: T| {
                    let (v, _) = kernel::mass_and_momentum(t, x, profile, sigma, cfg)
                        .expect("field evaluation inside the window");
                    v
                },
                &[(x0, x1)],
                &quad_tol,
            )?
        };
        mass.push(out.value[0]);
        momentum.push(out.value[1]);
    }
    Ok(Totals { t: t_list.to_vec(), mass, momentum })
}

/// Maximum relative drift of the totals from their t_list[0] values; the
/// momentum denominator is `momentum_scale` (e.g. mass * velocity bound)
/// so that symmetric zero-momentum data stays well-posed.
pub fn relative_drift<T: Real>(totals: &Totals<T>, momentum_scale: T) -> (T, T) {
    let m0 = totals.mass[0];
    let p0 = totals.momentum[0];
    let mut dm = T::zero();
    let mut dp = T::zero();
    for k in 1..totals.t.len() {
        dm = dm.max((totals.mass[k] - m0).abs());
        dp = dp.max((totals.momentum[k] - p0).abs());
    }
    (dm / m0.abs().max(T::min_positive_value()), dp / momentum_scale.max(T::min_positive_value()))
}
