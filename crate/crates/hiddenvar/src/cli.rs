//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::config::{ConfigFile, ExperimentConfig, Format, Overrides};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hiddenvar",
    version,
    about = "Hidden-variable polarizer model and time-operator checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Angular grid size.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Polarizer leakage ε in [0, 1).
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Monte Carlo events per setting pair.
    #[arg(long, global = true)]
    pub events: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solver tolerance (max norm).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of structured reports.
    #[arg(long, global = true)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a transfer profile from the generalized Malus law.
    Deconvolve(DeconvolveArgs),
    /// Transmission through a polarizer chain.
    Chain(ChainArgs),
    /// CHSH combination from simulated coincidences.
    Chsh(ChshArgs),
    /// CHSH scan over rotated canonical settings.
    Scan(ScanArgs),
    /// Trajectory of a free two-body wavepacket.
    Packet(PacketArgs),
    /// Truncated oscillator: commutator residuals and phase trajectory.
    Osc(OscArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Deconvolve(_) => "deconvolve",
            Self::Chain(_) => "chain",
            Self::Chsh(_) => "chsh",
            Self::Scan(_) => "scan",
            Self::Packet(_) => "packet",
            Self::Osc(_) => "osc",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DeconvolveArgs {
    /// Gradient step relative to 1/M̂₀.
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainModeArg {
    Paper,
    Collapse,
    Mueller,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// Profile CSV (`lambda,value`). Not needed for mueller mode alone.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Comma-separated polarizer axes, e.g. `0,pi/4,pi/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub angles: String,
    /// Read plain numbers in `--angles` as degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Modes to evaluate; all three when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub mode: Vec<ChainModeArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Profile CSV (`lambda,value`).
    #[arg(long)]
    pub profile: PathBuf,
    /// Comma-separated histogram weights for λ over [0, π); uniform if omitted.
    #[arg(long)]
    pub lambda_weights: Option<String>,
    /// Per-wing impact-parameter weight: linear, quadratic or gaussian:WIDTH.
    #[arg(long)]
    pub impact: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ChshArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// `alpha,alpha',beta,beta'`; defaults to `pi/4,0,pi/8,3pi/8`.
    #[arg(long, allow_hyphen_values = true)]
    pub settings: Option<String>,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of θ values in [0, π/2]; settings are (2θ, 0; θ, 3θ).
    #[arg(long, default_value_t = 46)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PacketArgs {
    /// Packet specification (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Evolution time after the packet's epoch.
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OscArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub spring: f64,
    /// Truncation dimension N.
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// Mean excitation of the coherent initial state.
    #[arg(long, default_value_t = 10.0)]
    pub nbar: f64,
    /// Initial phase atan2(⟨S⟩, ⟨C⟩).
    #[arg(long, default_value = "pi/3", allow_hyphen_values = true)]
    pub phase: String,
    /// Duration; three periods when omitted.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 600)]
    pub steps: usize,
    /// Rows excluded from the interior block; N/4 when omitted.
    #[arg(long)]
    pub buffer: Option<usize>,
    #[arg(long, default_value_t = hiddenvar_core::oscillator::DEFAULT_TAIL_THRESHOLD)]
    pub tail_threshold: f64,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid: self.grid,
            epsilon: self.epsilon,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            events: self.events,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

/// Resolve configuration and run the selected command.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let file = cli
        .global
        .config
        .as_deref()
        .map(ConfigFile::load)
        .transpose()?;
    let cfg =
        ExperimentConfig::resolve(cli.command.name(), file.as_ref(), &cli.global.overrides())?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::write(&cfg.out, e))?;
    match &cli.command {
        Command::Deconvolve(a) => commands::deconvolve(&cfg, a),
        Command::Chain(a) => commands::chain(&cfg, a),
        Command::Chsh(a) => commands::chsh(&cfg, a),
        Command::Scan(a) => commands::scan(&cfg, a),
        Command::Packet(a) => commands::packet(&cfg, a),
        Command::Osc(a) => commands::osc(&cfg, a),
    }
}
