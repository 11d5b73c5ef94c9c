//! Independent oracles for the kernel fields: brute-force Gaussian-
//! mixture quadratures on fixed grids, characteristic values, and
//! conservation checks.

mod common;

use std::collections::BTreeMap;

use common::{simpson, transition_density};
use stochgas::characteristics::{limit_fields, ScanConfig};
use stochgas::kernel::{
    field_sample, joint_density, momentum_density, rho_sigma, u_sigma, QuadratureConfig, SigmaPair,
};
use stochgas::profiles::{analytic_profile, InitialProfile};

fn cfg() -> QuadratureConfig<f64> {
    QuadratureConfig::default()
}

fn tanh_profile() -> InitialProfile<f64> {
    analytic_profile("tanh-compression", &BTreeMap::new()).unwrap()
}

#[test]
fn joint_density_matches_the_mixture_oracle_flat_stream() {
    // rho0 = 1, u0 = 0: the u-marginal of the mixture is N(0, sigma2^2 t),
    // so P(1, 0, 0) = 1/sqrt(2 pi)
    let p = analytic_profile::<f64>("constant", &BTreeMap::new()).unwrap();
    let sigma = SigmaPair::new(1.0, 1.0).unwrap();
    let value = joint_density(1.0, 0.0, 0.0, &p, &sigma, &cfg()).unwrap();

    let oracle = simpson(|s| transition_density(1.0, 1.0, 1.0, s, 0.0, 0.0, 0.0), -30.0, 30.0, 60_000);
    assert!((value - oracle).abs() / oracle < 1e-9, "impl {value} vs oracle {oracle}");
    let frozen = 0.398_942_280_401_432_7;
    assert!((value - frozen).abs() < 1e-9, "impl {value} vs 1/sqrt(2 pi)");
}

#[test]
fn joint_density_matches_the_mixture_oracle_compression() {
    let p = tanh_profile();
    let sigma = SigmaPair::new(0.5, 0.7).unwrap();
    let (t, x, u) = (0.8, 0.3, -0.4);
    let value = joint_density(t, x, u, &p, &sigma, &cfg()).unwrap();
    let oracle = simpson(
        |s| transition_density(t, 0.5, 0.7, s, p.u0(s), x, u),
        -15.0,
        15.0,
        120_000,
    );
    assert!(
        (value - oracle).abs() / oracle < 1e-8,
        "impl {value} vs oracle {oracle}"
    );
}

#[test]
fn u_marginal_of_the_joint_density_reproduces_rho() {
    let p = tanh_profile();
    let sigma = SigmaPair::new(0.3, 0.3).unwrap();
    for (t, x) in [(0.4, 0.0), (0.8, -0.7), (1.2, 1.3)] {
        let marginal = simpson(
            |u| joint_density(t, x, u, &p, &sigma, &cfg()).unwrap(),
            -5.0,
            5.0,
            1600,
        );
        let rho = rho_sigma(t, x, &p, &sigma, &cfg()).unwrap();
        assert!(
            (marginal - rho).abs() / rho < 1e-7,
            "t={t}, x={x}: marginal {marginal} vs rho {rho}"
        );
    }
}

#[test]
fn first_moment_of_the_joint_density_reproduces_momentum() {
    let p = tanh_profile();
    let sigma = SigmaPair::new(0.3, 0.3).unwrap();
    for (t, x) in [(0.5, 0.4), (1.0, -0.9)] {
        let moment = simpson(
            |u| u * joint_density(t, x, u, &p, &sigma, &cfg()).unwrap(),
            -5.0,
            5.0,
            1600,
        );
        let momentum = momentum_density(t, x, &p, &sigma, &cfg()).unwrap();
        assert!(
            (moment - momentum).abs() / momentum.abs().max(1.0) < 1e-7,
            "t={t}, x={x}: moment {moment} vs rho*u {momentum}"
        );
    }
}

#[test]
fn bump_mass_is_conserved_in_time() {
    let p = analytic_profile::<f64>("gaussian-bump", &BTreeMap::new()).unwrap();
    let sigma = SigmaPair::new(0.4, 0.4).unwrap();
    let initial = (2.0 * std::f64::consts::PI).sqrt();
    for t in [0.5, 1.0, 2.0] {
        let mass = simpson(
            |x| rho_sigma(t, x, &p, &sigma, &cfg()).unwrap(),
            -14.0,
            14.0,
            2800,
        );
        assert!(
            (mass - initial).abs() / initial < 1e-7,
            "t={t}: mass {mass} vs {initial}"
        );
    }
}

#[test]
fn linear_ramp_velocity_equals_the_characteristic_value() {
    // for linear u0 and flat rho0 the tilted Gaussian means sit exactly on
    // the characteristic root, so u_sigma = u0(s0) for every sigma
    let a = 0.5;
    let p = analytic_profile::<f64>("linear-ramp", &[("a".into(), a)].into()).unwrap();
    let t = 1.0;
    for sig in [0.1, 0.05] {
        let sigma = SigmaPair::new(sig, sig).unwrap();
        for x in [-0.5, 0.0, 0.7] {
            let s0 = x / (1.0 - a * t);
            let exact = -a * s0;
            let u = u_sigma(t, x, &p, &sigma, &cfg()).unwrap();
            assert!(
                (u - exact).abs() < 1e-9,
                "sigma={sig}, x={x}: u {u} vs characteristic {exact}"
            );
        }
    }
}

#[test]
fn velocity_error_shrinks_with_sigma_on_the_smooth_set() {
    let p = tanh_profile();
    let scan = ScanConfig::default();
    let t = 0.5;
    for x in [0.3, -0.6] {
        let (_, u_bar) = limit_fields(t, x, &p, &scan).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..4 {
            let s = 0.1 / f64::powi(2.0, k);
            let sigma = SigmaPair::new(s, s).unwrap();
            let err = (u_sigma(t, x, &p, &sigma, &cfg()).unwrap() - u_bar).abs();
            assert!(err < last, "x={x}, sigma={s}: error {err} did not shrink from {last}");
            last = err;
        }
    }
}

#[test]
fn pressure_matches_the_2d_quadrature_oracle_flat_stream() {
    // sigma1 = 0, sigma2 = 1, t = 1. With a flat stream the position
    // carries no information about the velocity, so pi is the full
    // velocity variance sigma2^2 t (= conditional variance 1/4 plus the
    // spread of conditional means slope^2 var_x = 3/4), not the
    // fixed-start conditional variance alone.
    let p = analytic_profile::<f64>("constant", &BTreeMap::new()).unwrap();
    let sigma = SigmaPair::new(0.0, 1.0).unwrap();
    let (t, x) = (1.0, 0.3);
    let pi = stochgas::kernel::spurious_pressure(t, x, &p, &sigma, &cfg()).unwrap();

    let p_of_u =
        |u: f64| simpson(|s| transition_density(t, 0.0, 1.0, s, 0.0, x, u), -10.0, 10.0, 4000);
    let u_mean = 0.0;
    let oracle = simpson(|u| (u - u_mean) * (u - u_mean) * p_of_u(u), -8.0, 8.0, 1600);
    assert!((pi - oracle).abs() / oracle < 1e-6, "impl {pi} vs 2d oracle {oracle}");
    assert!((pi - 1.0).abs() < 1e-8, "impl {pi} vs exact sigma2^2 t");
}

#[test]
fn pressure_matches_the_2d_quadrature_oracle_compression() {
    let p = tanh_profile();
    let (s1, s2) = (0.4, 0.6);
    let sigma = SigmaPair::new(s1, s2).unwrap();
    let (t, x) = (0.8, 0.3);
    let sample = field_sample(t, x, &p, &sigma, &cfg()).unwrap();

    let p_of_u = |u: f64| {
        simpson(|s| p.rho0(s) * transition_density(t, s1, s2, s, p.u0(s), x, u), -12.0, 12.0, 6000)
    };
    let rho_o = simpson(&p_of_u, -6.0, 6.0, 1200);
    let mom_o = simpson(|u| u * p_of_u(u), -6.0, 6.0, 1200);
    let u_o = mom_o / rho_o;
    let pi_o = simpson(|u| (u - u_o) * (u - u_o) * p_of_u(u), -6.0, 6.0, 1200);

    assert!((sample.rho - rho_o).abs() / rho_o < 1e-6, "rho {} vs {rho_o}", sample.rho);
    assert!((sample.u - u_o).abs() < 1e-6, "u {} vs {u_o}", sample.u);
    assert!((sample.pi - pi_o).abs() / pi_o < 1e-6, "pi {} vs {pi_o}", sample.pi);
}
