//! Serializable run configuration. Every command echoes its resolved
//! config into the JSON summary; feeding that JSON back through
//! `--config` reproduces the run byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use stochgas::kernel::{QuadratureConfig, SigmaPair};
use stochgas::profiles::{analytic_profile, make_riemann_profile, mollify, MollifierConfig, RiemannData};
use stochgas::{Error, Profile64, Result};

/// Initial-data specification: a registry name or `riemann-step`, its
/// parameters, and an optional mollification radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollify: Option<f64>,
}

impl ProfileSpec {
    pub fn build(&self) -> Result<Profile64> {
        let base = if self.kind == "riemann-step" {
            let get = |key: &str, default: f64| self.params.get(key).copied().unwrap_or(default);
            for key in self.params.keys() {
                if !["rho1", "rho2", "u1", "u2"].contains(&key.as_str()) {
                    return Err(Error::Constraint(format!(
                        "unknown riemann-step parameter '{key}'; allowed: rho1, rho2, u1, u2"
                    )));
                }
            }
            let data =
                RiemannData::new(get("rho1", 1.0), get("rho2", 1.0), get("u1", 0.0), get("u2", -1.0))?;
            make_riemann_profile(data)?
        } else {
            analytic_profile(&self.kind, &self.params)?
        };
        match self.mollify {
            Some(eps) => mollify(&base, &MollifierConfig::new(eps)?),
            None => Ok(base),
        }
    }
}

/// Quadrature parameters; defaults mirror the library.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub exp_cutoff: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        let d = QuadratureConfig::<f64>::default();
        QuadSpec {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            exp_cutoff: d.exp_cutoff,
            max_subdivisions: d.max_subdivisions,
        }
    }
}

impl QuadSpec {
    pub fn build(&self) -> Result<QuadratureConfig<f64>> {
        let cfg = QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            exp_cutoff: self.exp_cutoff,
            max_subdivisions: self.max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn sigma_pair(sigma: [f64; 2]) -> Result<SigmaPair<f64>> {
    SigmaPair::new(sigma[0], sigma[1])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldsConfig {
    pub profile: ProfileSpec,
    pub sigma: [f64; 2],
    pub t_list: Vec<f64>,
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    #[serde(default)]
    pub quadrature: QuadSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub profile: ProfileSpec,
    pub sigma: [f64; 2],
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    pub chunk_count: usize,
    pub window: [f64; 2],
    pub bins_lo: f64,
    pub bins_hi: f64,
    pub bins: usize,
    #[serde(default)]
    pub export_particles: bool,
    #[serde(default)]
    pub quadrature: QuadSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiemannConfig {
    pub rho1: f64,
    pub rho2: f64,
    pub u1: f64,
    pub u2: f64,
    pub t: f64,
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaConfig {
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualsConfig {
    pub profile: ProfileSpec,
    pub sigma: [f64; 2],
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
    pub h: f64,
    /// I_sigma identity checks at this many interior points (0 skips).
    #[serde(default)]
    pub identity_points: usize,
    #[serde(default)]
    pub identity_step: Option<f64>,
    /// Window for conserved totals over the grid's t-nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub totals_window: Option<[f64; 2]>,
    #[serde(default)]
    pub quadrature: QuadSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitConfig {
    pub profile: ProfileSpec,
    pub t: f64,
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
}

/// Tagged union echoed into summaries and accepted by `--config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Fields(FieldsConfig),
    Mc(McConfig),
    Riemann(RiemannConfig),
    Gamma(GammaConfig),
    Residuals(ResidualsConfig),
    Limit(LimitConfig),
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            RunConfig::Fields(_) => "fields",
            RunConfig::Mc(_) => "mc",
            RunConfig::Riemann(_) => "riemann",
            RunConfig::Gamma(_) => "gamma",
            RunConfig::Residuals(_) => "residuals",
            RunConfig::Limit(_) => "limit",
        }
    }
}

/// Evenly spaced grid including both endpoints (single point when n = 1).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}
