//! Library side of the `exitsim` command line tool: configuration handling,
//! the commands and their CSV output.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::ExperimentConfig;

/// Version of every CSV layout written by the tool.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("runtime cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Cap(_) => 4,
            CliError::Runtime(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<exitsim::Error> for CliError {
    fn from(e: exitsim::Error) -> Self {
        use exitsim::Error as E;
        match e {
            E::Configuration(msg) => CliError::Config(msg),
            E::Domain(_) | E::Precondition(_) => CliError::Config(e.to_string()),
            E::Runaway(_) | E::Convergence { .. } => CliError::Cap(e.to_string()),
            E::Degenerate(_) | E::Quadrature(_) | E::EmptySample => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "exitsim", version, about = "Exact simulation of diffusion exit times and locations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw M exits with a fixed slicing parameter N.
    Sample(SampleArgs),
    /// Mean cost of M exits for every N in N_min..=N0.
    Sweep(SweepArgs),
    /// M exits with N tuned online by an epsilon-greedy bandit.
    Bandit(BanditArgs),
    /// Compare samplers against their reference values.
    Validate(ValidateArgs),
    /// Dump exit-time CDF tables of Brownian motion from both series.
    #[command(hide = true)]
    KernelCheck(KernelCheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` config file; command line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// zero, sin, ou or cir.
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameters, e.g. `k=3,theta=7,sigma=1`.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<String>,
    /// Rectangle horizon, a positive number or `inf`.
    #[arg(long = "T")]
    pub horizon: Option<String>,
    /// Number of replications.
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock columns (written as NA otherwise).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Single rectangle `[0, T] x [S(a), S(b)]` instead of the walk.
    #[arg(long)]
    pub single_box: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Smallest N of the sweep.
    #[arg(long = "N-min")]
    pub n_min: Option<String>,
    /// Largest N of the sweep.
    #[arg(long = "N0")]
    pub n0: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BanditArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Arms are 2..=N0.
    #[arg(long = "N0")]
    pub n0: Option<String>,
    /// Exploration rate in (0, 1], or `decay`.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// wall or work.
    #[arg(long)]
    pub reward: Option<String>,
    /// Arm summary file; derived from --out if absent.
    #[arg(long)]
    pub arms_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// zero, sin, ou1, ou2, cir, all, or config (uses the given model and N).
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long = "N")]
    pub n: Option<String>,
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub gamma_shift: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelCheckArgs {
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub u: f64,
    #[arg(long, default_value_t = 0.005)]
    pub t_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        };
        put("model", &self.model);
        put("params", &self.params);
        put("a", &self.a);
        put("b", &self.b);
        put("x", &self.x);
        put("T", &self.horizon);
        put("M", &self.m);
        put("seed", &self.seed);
        if let Some(p) = &self.out {
            m.insert("out".into(), p.display().to_string());
        }
        if self.timing {
            m.insert("timing".into(), "true".into());
        }
        m
    }

    /// Builds the configuration from the config file plus these flags and
    /// the command-specific `extra` overrides.
    pub fn resolve(&self, extra: &[(&str, &Option<String>)]) -> Result<ExperimentConfig, CliError> {
        self.resolve_with_defaults(&[], extra)
    }

    /// Like [`CommonArgs::resolve`] with command-specific `defaults` that the
    /// config file and flags may override.
    pub fn resolve_with_defaults(
        &self,
        defaults: &[(&str, &str)],
        extra: &[(&str, &Option<String>)],
    ) -> Result<ExperimentConfig, CliError> {
        let mut file: BTreeMap<String, String> = defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(p) = &self.config {
            file.extend(config::read_config_file(p)?);
        }
        let mut overrides = self.overrides();
        for (k, v) in extra {
            if let Some(v) = v {
                overrides.insert(k.to_string(), v.clone());
            }
        }
        ExperimentConfig::from_maps(&file, &overrides)
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(args) => {
            let cfg = args.common.resolve(&[("N", &args.n)])?;
            commands::sample(&cfg, args.single_box)
        }
        Command::Sweep(args) => {
            let cfg = args.common.resolve(&[("N_min", &args.n_min), ("N0", &args.n0)])?;
            commands::sweep(&cfg)
        }
        Command::Bandit(args) => {
            let cfg = args
                .common
                .resolve(&[("N0", &args.n0), ("epsilon", &args.epsilon), ("reward", &args.reward)])?;
            commands::bandit(&cfg, args.arms_out.as_deref())
        }
        Command::Validate(args) => {
            let cfg = args
                .common
                .resolve_with_defaults(&[("M", validate::DEFAULT_N)], &[("N", &args.n)])?;
            validate::run(&cfg, &args.suite, args.gamma_shift)
        }
        Command::KernelCheck(args) => commands::kernel_check(&args),
    }
}
