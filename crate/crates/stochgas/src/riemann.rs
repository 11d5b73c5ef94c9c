//! Exact free-particle Riemann solution for compression data, Rankine-
//! Hugoniot residuals, and the adiabatic exponent extracted from the
//! energy jump condition.
//!
//! For step data with u2 < 0 the two free streams overlap in a middle
//! region bounded by shocks at speeds u1 + u2 and u1. The middle state is
//! the two-stream superposition: densities add, velocity is the mass-
//! weighted mean, and the pressure is the mass-weighted velocity variance
//! times the density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::RiemannData;
use crate::scalar::Real;

/// Density, velocity, pressure of one constant region. Pressure is zero
/// in single-stream regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasState<T> {
    pub rho: T,
    pub u: T,
    pub p: T,
}

/// Piecewise-constant compression fan: left / middle / right states with
/// the two shock speeds. Self-similar, valid for all t > 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShockFan<T> {
    pub left: GasState<T>,
    pub middle: GasState<T>,
    pub right: GasState<T>,
    /// Left shock x/t = u1 + u2.
    pub speed_left: T,
    /// Right shock x/t = u1.
    pub speed_right: T,
}

impl<T: Real> ShockFan<T> {
    /// State at (t, x); the shock lines take the right-limit value.
    pub fn eval(&self, t: T, x: T) -> GasState<T> {
        if x < self.speed_left * t {
            self.left
        } else if x < self.speed_right * t {
            self.middle
        } else {
            self.right
        }
    }
}

/// Jump residuals D[f] - [flux(f)] with the bracket fixed right-minus-left.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HugoniotResiduals<T> {
    /// D[rho] - [rho u].
    pub mass: T,
    /// D[rho u] - [rho u^2 + p].
    pub momentum: T,
    /// D[E] - [(E + p) u] with E = rho u^2 / 2 + p / (gamma - 1).
    pub energy: T,
}

/// Exact fan for compression data (u2 < 0).
pub fn solve_compression<T: Real>(data: &RiemannData<T>, t: T) -> Result<ShockFan<T>> {
    data.validate()?;
    if !(data.u2 < T::zero()) {
        return Err(Error::Rarefaction);
    }
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("the fan is defined for t > 0, got {t}")));
    }
    let RiemannData { rho1, rho2, u1, u2 } = *data;
    let rho_mid = rho1 + rho1 + rho2;
    let mass_right = rho1 + rho2;
    Ok(ShockFan {
        left: GasState { rho: rho1, u: u1, p: T::zero() },
        middle: GasState {
            rho: rho_mid,
            u: u1 + mass_right / rho_mid * u2,
            p: rho1 * mass_right / rho_mid * u2 * u2,
        },
        right: GasState { rho: mass_right, u: u1 + u2, p: T::zero() },
        speed_left: u1 + u2,
        speed_right: u1,
    })
}

/// Mass and momentum jump residuals across a discontinuity at speed `d`.
pub fn mass_momentum_residuals<T: Real>(left: &GasState<T>, right: &GasState<T>, d: T) -> (T, T) {
    let mass = d * (right.rho - left.rho) - (right.rho * right.u - left.rho * left.u);
    let momentum = d * (right.rho * right.u - left.rho * left.u)
        - ((right.rho * right.u * right.u + right.p) - (left.rho * left.u * left.u + left.p));
    (mass, momentum)
}

/// All three jump residuals; the energy bracket needs gamma > 1.
pub fn hugoniot_residuals<T: Real>(
    left: &GasState<T>,
    right: &GasState<T>,
    d: T,
    gamma: T,
) -> Result<HugoniotResiduals<T>> {
    if !(gamma > T::one()) {
        return Err(Error::Domain(format!(
            "the energy residual needs gamma > 1, got {gamma}"
        )));
    }
    let (mass, momentum) = mass_momentum_residuals(left, right, d);
    let half = T::of(0.5);
    let energy_of = |s: &GasState<T>| half * s.rho * s.u * s.u + s.p / (gamma - T::one());
    let e_l = energy_of(left);
    let e_r = energy_of(right);
    let energy = d * (e_r - e_l) - ((e_r + right.p) * right.u - (e_l + left.p) * left.u);
    Ok(HugoniotResiduals { mass, momentum, energy })
}

/// The unique gamma zeroing the energy residual, extracted in the shock
/// frame (velocities taken relative to `d`) so both shocks share one code
/// path:
///
/// ```text
/// 1/(gamma - 1) = [K v + p v] / (v_l p_l - v_r p_r),   K = rho v^2 / 2
/// ```
///
/// Indeterminate when the 1/(gamma - 1) coefficient vanishes (e.g. both
/// pressures zero).
pub fn gamma_from_energy<T: Real>(left: &GasState<T>, right: &GasState<T>, d: T) -> Result<T> {
    let half = T::of(0.5);
    let v_l = left.u - d;
    let v_r = right.u - d;
    let k_l = half * left.rho * v_l * v_l;
    let k_r = half * right.rho * v_r * v_r;
    let numerator = (k_r + right.p) * v_r - (k_l + left.p) * v_l;
    let denominator = v_l * left.p - v_r * right.p;
    let scale = (v_l * left.p).abs().max((v_r * right.p).abs()).max(T::min_positive_value());
    if denominator.abs() <= T::epsilon() * T::of(8.0) * scale {
        return Err(Error::Indeterminate(
            "the energy condition does not constrain gamma (pressure jump term vanishes)".into(),
        ));
    }
    Ok(T::one() + denominator / numerator)
}

/// One row of the adiabatic-exponent sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaRow<T> {
    /// Density ratio rho2 / rho1.
    pub ratio: T,
    pub gamma_left: T,
    pub gamma_right: T,
    pub dev_left: T,
    pub dev_right: T,
}

/// Gamma at both shocks of the unit compression fan (rho1 = 1, u2 = -1)
/// over a list of density ratios rho2/rho1; both columns approach the
/// monoatomic value 3 as the ratio goes to 0.
pub fn gamma_limit_sweep<T: Real>(ratios: &[T]) -> Result<Vec<GammaRow<T>>> {
    let three = T::of(3.0);
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        if !(ratio > T::zero()) || !ratio.is_finite() {
            return Err(Error::Constraint(format!("density ratio must be positive, got {ratio}")));
        }
        let data = RiemannData::new(T::one(), ratio, T::zero(), -T::one())?;
        let fan = solve_compression(&data, T::one())?;
        let gamma_left = gamma_from_energy(&fan.left, &fan.middle, fan.speed_left)?;
        let gamma_right = gamma_from_energy(&fan.middle, &fan.right, fan.speed_right)?;
        rows.push(GammaRow {
            ratio,
            gamma_left,
            gamma_right,
            dev_left: (gamma_left - three).abs(),
            dev_right: (gamma_right - three).abs(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_fan() -> ShockFan<f64> {
        solve_compression(&RiemannData::new(1.0, 1.0, 0.0, -1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn worked_compression_example() {
        let fan = unit_fan();
        assert_eq!(fan.left, GasState { rho: 1.0, u: 0.0, p: 0.0 });
        assert_eq!(fan.right, GasState { rho: 2.0, u: -1.0, p: 0.0 });
        assert_relative_eq!(fan.middle.rho, 3.0);
        assert_relative_eq!(fan.middle.u, -2.0 / 3.0);
        assert_relative_eq!(fan.middle.p, 2.0 / 3.0);
        assert_eq!(fan.speed_left, -1.0);
        assert_eq!(fan.speed_right, 0.0);
    }

    #[test]
    fn eval_regions_and_right_limit_convention() {
        let fan = unit_fan();
        assert_eq!(fan.eval(1.0, -2.0), fan.left);
        assert_eq!(fan.eval(1.0, -0.5), fan.middle);
        assert_eq!(fan.eval(1.0, 0.5), fan.right);
        // on the shock lines the value comes from the right
        assert_eq!(fan.eval(1.0, -1.0), fan.middle);
        assert_eq!(fan.eval(1.0, 0.0), fan.right);
        assert_eq!(fan.eval(2.0, -2.0), fan.middle);
    }

    #[test]
    fn symmetric_two_stream_collision() {
        // rho2 = 0: middle = (2 rho1, u1 + u2/2, rho1 u2^2 / 2)
        let fan =
            solve_compression(&RiemannData::new(1.5, 0.0, 0.3, -2.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(fan.middle.rho, 3.0);
        assert_relative_eq!(fan.middle.u, 0.3 - 1.0);
        assert_relative_eq!(fan.middle.p, 1.5 * 4.0 / 2.0);
    }

    #[test]
    fn rarefaction_and_bad_time_rejected() {
        let data = RiemannData::new(1.0, 1.0, 0.0, 0.5).unwrap();
        assert!(matches!(solve_compression(&data, 1.0), Err(Error::Rarefaction)));
        let data = RiemannData::new(1.0, 1.0, 0.0, -0.5).unwrap();
        assert!(matches!(solve_compression(&data, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn equal_states_have_zero_residuals() {
        let s = GasState { rho: 2.0, u: -0.3, p: 0.7 };
        for d in [-1.0, 0.0, 2.5] {
            for gamma in [1.4, 3.0] {
                let r = hugoniot_residuals(&s, &s, d, gamma).unwrap();
                assert_eq!(r.mass, 0.0);
                assert_eq!(r.momentum, 0.0);
                assert_eq!(r.energy, 0.0);
            }
        }
    }

    #[test]
    fn worked_left_shock_closes_at_gamma_two() {
        let fan = unit_fan();
        let r = hugoniot_residuals(&fan.left, &fan.middle, fan.speed_left, 2.0).unwrap();
        assert!(r.mass.abs() < 1e-15);
        assert!(r.momentum.abs() < 1e-15);
        assert!(r.energy.abs() < 1e-15);
        let gamma = gamma_from_energy(&fan.left, &fan.middle, fan.speed_left).unwrap();
        assert_relative_eq!(gamma, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn worked_right_shock_mass_momentum_close_for_any_gamma() {
        let fan = unit_fan();
        for gamma in [1.3, 2.0, 7.0] {
            let r = hugoniot_residuals(&fan.middle, &fan.right, fan.speed_right, gamma).unwrap();
            assert!(r.mass.abs() < 1e-15);
            assert!(r.momentum.abs() < 1e-15);
        }
        let gamma = gamma_from_energy(&fan.middle, &fan.right, fan.speed_right).unwrap();
        assert_relative_eq!(gamma, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn gamma_needs_a_pressure_jump() {
        let l = GasState { rho: 1.0, u: 0.5, p: 0.0 };
        let r = GasState { rho: 2.0, u: -0.5, p: 0.0 };
        assert!(matches!(gamma_from_energy(&l, &r, 0.2), Err(Error::Indeterminate(_))));
        let bad = hugoniot_residuals(&l, &r, 0.2, 1.0);
        assert!(matches!(bad, Err(Error::Domain(_))));
    }

    #[test]
    fn sweep_matches_closed_forms() {
        let rows = gamma_limit_sweep(&[1.0, 1e-1, 1e-2, 1e-3]).unwrap();
        assert_relative_eq!(rows[0].gamma_left, 2.0, epsilon = 1e-14);
        assert_relative_eq!(rows[0].gamma_right, 5.0, epsilon = 1e-13);
        for row in &rows {
            let r = row.ratio;
            assert_relative_eq!(row.gamma_left, (3.0 + r) / (1.0 + r), epsilon = 1e-12);
            assert_relative_eq!(row.gamma_right, 3.0 + 2.0 * r, epsilon = 1e-12);
        }
        // both columns approach the 1D monoatomic value 3
        assert!(rows.windows(2).all(|w| w[1].dev_left < w[0].dev_left));
        assert!(rows.windows(2).all(|w| w[1].dev_right < w[0].dev_right));
        assert!(rows[3].dev_left < 0.01);
    }

    proptest! {
        #[test]
        fn hugoniot_mass_momentum_exact_on_random_fans(
            rho1 in 0.1f64..3.0,
            rho2 in -0.05f64..3.0,
            u1 in -2.0f64..2.0,
            u2 in -3.0f64..-0.1,
        ) {
            prop_assume!(rho1 + rho2 > 0.05);
            let data = RiemannData::new(rho1, rho2, u1, u2).unwrap();
            let fan = solve_compression(&data, 1.0).unwrap();
            for (l, r, d) in [
                (&fan.left, &fan.middle, fan.speed_left),
                (&fan.middle, &fan.right, fan.speed_right),
            ] {
                let (mass, momentum) = mass_momentum_residuals(l, r, d);
                prop_assert!(mass.abs() < 1e-12, "mass residual {mass}");
                prop_assert!(momentum.abs() < 1e-12, "momentum residual {momentum}");
            }
        }

        #[test]
        fn gamma_closed_forms_on_random_fans(
            rho1 in 0.1f64..3.0,
            rho2 in -0.05f64..3.0,
            u1 in -2.0f64..2.0,
            u2 in -3.0f64..-0.1,
        ) {
            prop_assume!(rho1 + rho2 > 0.05);
            let data = RiemannData::new(rho1, rho2, u1, u2).unwrap();
            let fan = solve_compression(&data, 1.0).unwrap();
            let g_l = gamma_from_energy(&fan.left, &fan.middle, fan.speed_left).unwrap();
            let g_r = gamma_from_energy(&fan.middle, &fan.right, fan.speed_right).unwrap();
            prop_assert!((g_l - (3.0 * rho1 + rho2) / (rho1 + rho2)).abs() < 1e-11);
            prop_assert!((g_r - (3.0 + 2.0 * rho2 / rho1)).abs() < 1e-10);
            // the extracted gamma zeroes the energy residual
            let res = hugoniot_residuals(&fan.left, &fan.middle, fan.speed_left, g_l).unwrap();
            prop_assert!(res.energy.abs() < 1e-11, "energy residual {}", res.energy);
        }

        #[test]
        fn galilean_boost_shifts_speeds_only(
            boost in -2.0f64..2.0,
            rho1 in 0.1f64..3.0,
            rho2 in 0.0f64..3.0,
            u2 in -3.0f64..-0.1,
        ) {
            let base = RiemannData::new(rho1, rho2, 0.4, u2).unwrap();
            let lifted = RiemannData::new(rho1, rho2, 0.4 + boost, u2).unwrap();
            let f0 = solve_compression(&base, 1.0).unwrap();
            let f1 = solve_compression(&lifted, 1.0).unwrap();
            prop_assert!((f1.speed_left - f0.speed_left - boost).abs() < 1e-12);
            prop_assert!((f1.speed_right - f0.speed_right - boost).abs() < 1e-12);
            prop_assert!((f1.middle.rho - f0.middle.rho).abs() < 1e-12);
            prop_assert!((f1.middle.p - f0.middle.p).abs() < 1e-12);
            prop_assert!((f1.middle.u - f0.middle.u - boost).abs() < 1e-12);
            let g0 = gamma_from_energy(&f0.left, &f0.middle, f0.speed_left).unwrap();
            let g1 = gamma_from_energy(&f1.left, &f1.middle, f1.speed_left).unwrap();
            prop_assert!((g0 - g1).abs() < 1e-11);
        }

        #[test]
        fn middle_pressure_is_the_mixture_variance(
            rho1 in 0.1f64..3.0,
            rho2 in -0.05f64..3.0,
            u1 in -2.0f64..2.0,
            u2 in -3.0f64..-0.1,
        ) {
            prop_assume!(rho1 + rho2 > 0.05);
            let data = RiemannData::new(rho1, rho2, u1, u2).unwrap();
            let fan = solve_compression(&data, 1.0).unwrap();
            // two-point mixture: u1 w.p. rho1/rho_mid, u1+u2 w.p. (rho1+rho2)/rho_mid
            let rho_mid = 2.0 * rho1 + rho2;
            let w1 = rho1 / rho_mid;
            let w2 = (rho1 + rho2) / rho_mid;
            let mean = w1 * u1 + w2 * (u1 + u2);
            let var = w1 * (u1 - mean).powi(2) + w2 * (u1 + u2 - mean).powi(2);
            prop_assert!((fan.middle.p - rho_mid * var).abs() < 1e-12);
            prop_assert!((fan.middle.u - mean).abs() < 1e-13);
        }
    }
}
