//! Command-line front end for the stochgas library.

mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{
    FieldsConfig, GammaConfig, LimitConfig, McConfig, ProfileSpec, QuadSpec, ResidualsConfig,
    RiemannConfig, RunConfig,
};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "stochgas",
    version,
    about = "Stochastically regularized pressureless gas dynamics: kernel fields, Monte Carlo sampling, balance-law residuals, characteristic limits and the exact compression Riemann fan"
)]
struct Cli {
    /// Directory for output files
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form fields (rho, u, pi) on a (t, x) grid
    Fields(FieldsArgs),
    /// Monte Carlo ensemble, histogram estimators and closed-form comparison
    Mc(McArgs),
    /// Exact free-particle compression fan and its sampled profile
    Riemann(RiemannArgs),
    /// Adiabatic-exponent sweep over density ratios
    Gamma(GammaArgs),
    /// Balance-law residuals, I_sigma identity check and conserved totals
    Residuals(ResidualsArgs),
    /// sigma -> 0 limit fields from characteristic branch sums
    Limit(LimitArgs),
}

#[derive(Args, Default)]
struct ProfileArgs {
    /// Profile kind: constant | linear-ramp | tanh-compression | gaussian-bump | sine | riemann-step
    #[arg(long)]
    profile: Option<String>,
    /// Profile parameter as key=value (repeatable)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Mollification radius applied to the profile
    #[arg(long)]
    mollify: Option<f64>,
}

impl ProfileArgs {
    fn given(&self) -> bool {
        self.profile.is_some() || !self.params.is_empty() || self.mollify.is_some()
    }

    fn resolve(&self, default_kind: &str) -> Result<ProfileSpec, CliError> {
        let mut params = BTreeMap::new();
        for entry in &self.params {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param needs KEY=VALUE, got '{entry}'")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| CliError::Config(format!("--param {key}: '{value}' is not a number")))?;
            params.insert(key.to_string(), value);
        }
        Ok(ProfileSpec {
            kind: self.profile.clone().unwrap_or_else(|| default_kind.to_string()),
            params,
            mollify: self.mollify,
        })
    }
}

#[derive(Args, Default)]
struct SigmaArgs {
    /// Spatial noise amplitude sigma1
    #[arg(long)]
    sigma1: Option<f64>,
    /// Velocity noise amplitude sigma2
    #[arg(long)]
    sigma2: Option<f64>,
}

impl SigmaArgs {
    fn given(&self) -> bool {
        self.sigma1.is_some() || self.sigma2.is_some()
    }

    fn resolve(&self, default: [f64; 2]) -> [f64; 2] {
        [self.sigma1.unwrap_or(default[0]), self.sigma2.unwrap_or(default[1])]
    }
}

#[derive(Args, Default)]
struct QuadArgs {
    /// Relative quadrature tolerance
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Absolute quadrature tolerance
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Log-weight truncation threshold
    #[arg(long)]
    exp_cutoff: Option<f64>,
    /// Cap on adaptive refinement
    #[arg(long)]
    max_subdivisions: Option<usize>,
}

impl QuadArgs {
    fn given(&self) -> bool {
        self.rel_tol.is_some()
            || self.abs_tol.is_some()
            || self.exp_cutoff.is_some()
            || self.max_subdivisions.is_some()
    }

    fn resolve(&self) -> QuadSpec {
        let mut spec = QuadSpec::default();
        if let Some(v) = self.rel_tol {
            spec.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            spec.abs_tol = v;
        }
        if let Some(v) = self.exp_cutoff {
            spec.exp_cutoff = v;
        }
        if let Some(v) = self.max_subdivisions {
            spec.max_subdivisions = v;
        }
        spec
    }
}

fn load_config(path: &PathBuf, expect: &str) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
    // accept both a bare config and a summary file carrying one
    let config_value = value.get("config").cloned().unwrap_or(value);
    let config: RunConfig = serde_json::from_value(config_value)
        .map_err(|e| CliError::Config(format!("invalid config in {}: {e}", path.display())))?;
    if config.command_name() != expect {
        return Err(CliError::Config(format!(
            "config in {} is for '{}', not '{expect}'",
            path.display(),
            config.command_name()
        )));
    }
    Ok(config)
}

fn reject_flags_with_config(config_given: bool, flags_given: bool) -> Result<(), CliError> {
    if config_given && flags_given {
        return Err(CliError::Config(
            "--config replaces the command parameters; pass either the file or the flags".into(),
        ));
    }
    Ok(())
}

#[derive(Args)]
struct FieldsArgs {
    /// JSON run configuration (replaces all other parameters)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(flatten)]
    sigma: SigmaArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Evaluation time (repeatable)
    #[arg(long = "t", value_name = "T")]
    t_list: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x1: Option<f64>,
    /// Points across [x0, x1]
    #[arg(long)]
    nx: Option<usize>,
}

impl FieldsArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let flags = self.profile.given()
                || self.sigma.given()
                || self.quad.given()
                || !self.t_list.is_empty()
                || self.x0.is_some()
                || self.x1.is_some()
                || self.nx.is_some();
            reject_flags_with_config(true, flags)?;
            return load_config(path, "fields");
        }
        Ok(RunConfig::Fields(FieldsConfig {
            profile: self.profile.resolve("constant")?,
            sigma: self.sigma.resolve([0.1, 0.1]),
            t_list: if self.t_list.is_empty() { vec![1.0] } else { self.t_list },
            x0: self.x0.unwrap_or(-2.0),
            x1: self.x1.unwrap_or(2.0),
            nx: self.nx.unwrap_or(81),
            quadrature: self.quad.resolve(),
        }))
    }
}

#[derive(Args)]
struct McArgs {
    /// JSON run configuration (replaces all other parameters)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(flatten)]
    sigma: SigmaArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Sample time
    #[arg(long)]
    t: Option<f64>,
    /// Ensemble size
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed (required)
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel RNG streams
    #[arg(long)]
    chunks: Option<usize>,
    /// Start-position window lower edge
    #[arg(long, allow_negative_numbers = true)]
    window_lo: Option<f64>,
    /// Start-position window upper edge
    #[arg(long, allow_negative_numbers = true)]
    window_hi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    bins_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    bins_hi: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    /// Also write the raw ensemble as particles.csv
    #[arg(long)]
    export_particles: bool,
}

impl McArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let flags = self.profile.given()
                || self.sigma.given()
                || self.quad.given()
                || self.t.is_some()
                || self.n.is_some()
                || self.seed.is_some()
                || self.chunks.is_some()
                || self.window_lo.is_some()
                || self.window_hi.is_some()
                || self.bins_lo.is_some()
                || self.bins_hi.is_some()
                || self.bins.is_some()
                || self.export_particles;
            reject_flags_with_config(true, flags)?;
            return load_config(path, "mc");
        }
        let seed = self
            .seed
            .ok_or_else(|| CliError::Config("mc needs an explicit --seed".into()))?;
        Ok(RunConfig::Mc(McConfig {
            profile: self.profile.resolve("riemann-step")?,
            sigma: self.sigma.resolve([0.05, 0.05]),
            t: self.t.unwrap_or(1.0),
            n: self.n.unwrap_or(100_000),
            seed,
            chunk_count: self.chunks.unwrap_or(64),
            window: [self.window_lo.unwrap_or(-6.0), self.window_hi.unwrap_or(6.0)],
            bins_lo: self.bins_lo.unwrap_or(-2.0),
            bins_hi: self.bins_hi.unwrap_or(2.0),
            bins: self.bins.unwrap_or(100),
            export_particles: self.export_particles,
            quadrature: self.quad.resolve(),
        }))
    }
}

#[derive(Args)]
struct RiemannArgs {
    /// JSON run configuration (replaces all other parameters)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rho2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u2: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x1: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
}

impl RiemannArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let flags = self.rho1.is_some()
                || self.rho2.is_some()
                || self.u1.is_some()
                || self.u2.is_some()
                || self.t.is_some()
                || self.x0.is_some()
                || self.x1.is_some()
                || self.nx.is_some();
            reject_flags_with_config(true, flags)?;
            return load_config(path, "riemann");
        }
        Ok(RunConfig::Riemann(RiemannConfig {
            rho1: self.rho1.unwrap_or(1.0),
            rho2: self.rho2.unwrap_or(1.0),
            u1: self.u1.unwrap_or(0.0),
            u2: self.u2.unwrap_or(-1.0),
            t: self.t.unwrap_or(1.0),
            x0: self.x0.unwrap_or(-3.0),
            x1: self.x1.unwrap_or(2.0),
            nx: self.nx.unwrap_or(201),
        }))
    }
}

#[derive(Args)]
struct GammaArgs {
    /// JSON run configuration (replaces all other parameters)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Density ratio rho2/rho1 (repeatable)
    #[arg(long = "ratio", value_name = "R")]
    ratios: Vec<f64>,
}

impl GammaArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            reject_flags_with_config(true, !self.ratios.is_empty())?;
            return load_config(path, "gamma");
        }
        Ok(RunConfig::Gamma(GammaConfig {
            ratios: if self.ratios.is_empty() {
                vec![1.0, 0.1, 0.01, 0.001]
            } else {
                self.ratios
            },
        }))
    }
}

#[derive(Args)]
struct ResidualsArgs {
    /// JSON run configuration (replaces all other parameters)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(flatten)]
    sigma: SigmaArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x1: Option<f64>,
    /// Lattice step (h_t = h_x)
    #[arg(long)]
    h: Option<f64>,
    /// I_sigma identity checks at this many interior points
    #[arg(long)]
    identity_points: Option<usize>,
    /// Centered-difference step for the identity check
    #[arg(long)]
    identity_step: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    totals_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    totals_hi: Option<f64>,
}

impl ResidualsArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let flags = self.profile.given()
                || self.sigma.given()
                || self.quad.given()
                || self.t0.is_some()
                || self.t1.is_some()
                || self.x0.is_some()
                || self.x1.is_some()
                || self.h.is_some()
                || self.identity_points.is_some()
                || self.identity_step.is_some()
                || self.totals_lo.is_some()
                || self.totals_hi.is_some();
            reject_flags_with_config(true, flags)?;
            return load_config(path, "residuals");
        }
        let totals_window = match (self.totals_lo, self.totals_hi) {
            (Some(lo), Some(hi)) => Some([lo, hi]),
            (None, None) => None,
            _ => {
                return Err(CliError::Config(
                    "totals need both --totals-lo and --totals-hi".into(),
                ))
            }
        };
        Ok(RunConfig::Residuals(ResidualsConfig {
            profile: self.profile.resolve("gaussian-bump")?,
            sigma: self.sigma.resolve([0.2, 0.2]),
            t0: self.t0.unwrap_or(0.5),
            t1: self.t1.unwrap_or(1.0),
            x0: self.x0.unwrap_or(-2.0),
            x1: self.x1.unwrap_or(2.0),
            h: self.h.unwrap_or(0.05),
            identity_points: self.identity_points.unwrap_or(5),
            identity_step: self.identity_step,
            totals_window,
            quadrature: self.quad.resolve(),
        }))
    }
}

#[derive(Args)]
struct LimitArgs {
    /// JSON run configuration (replaces all other parameters)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x1: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
}

impl LimitArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let flags = self.profile.given()
                || self.t.is_some()
                || self.x0.is_some()
                || self.x1.is_some()
                || self.nx.is_some();
            reject_flags_with_config(true, flags)?;
            return load_config(path, "limit");
        }
        Ok(RunConfig::Limit(LimitConfig {
            profile: self.profile.resolve("tanh-compression")?,
            t: self.t.unwrap_or(0.5),
            x0: self.x0.unwrap_or(-2.0),
            x1: self.x1.unwrap_or(2.0),
            nx: self.nx.unwrap_or(101),
        }))
    }
}

fn run_cli(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = match cli.command {
        Command::Fields(args) => args.resolve()?,
        Command::Mc(args) => args.resolve()?,
        Command::Riemann(args) => args.resolve()?,
        Command::Gamma(args) => args.resolve()?,
        Command::Residuals(args) => args.resolve()?,
        Command::Limit(args) => args.resolve()?,
    };
    commands::run(&config, &cli.out_dir)
}

fn main() {
    let cli = Cli::parse();
    match run_cli(cli) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
        }
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": { "kind": err.kind(), "message": err.message() } })
            );
            std::process::exit(err.exit_code());
        }
    }
}
