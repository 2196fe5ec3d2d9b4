mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Cluster shift keying laboratory.
#[derive(Debug, Parser)]
#[command(name = "clsk", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Network description file (TOML). Defaults to the built-in Example I design.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed. Each command has its own default.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "CLSK_OUT_DIR", default_value = "clsk-out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the master stability function and locate its threshold.
    Msf(MsfArgs),
    /// Validate a design: structure, requirements, spectra, coupling and pinning ranges.
    DesignCheck(DesignCheckArgs),
    /// Send a bit string through the network and run the detector.
    Transmit(TransmitArgs),
    /// Monte Carlo bit error rates over a parameter grid.
    Ber(BerArgs),
    /// Spectrogram of a link error signal from a trace file.
    Spectrogram(SpectrogramArgs),
    /// Print a built-in design as TOML.
    Preset(PresetArgs),
}

#[derive(Debug, Args)]
pub struct MsfArgs {
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta_step: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub transient: f64,
    #[arg(long, default_value_t = 2000.0)]
    pub horizon: f64,
}

#[derive(Debug, Args)]
pub struct DesignCheckArgs {
    /// Stability threshold to use instead of computing the MSF.
    #[arg(long, allow_hyphen_values = true)]
    pub eta_bar: Option<f64>,
    /// Integration horizon when the MSF has to be computed.
    #[arg(long, default_value_t = 2000.0)]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sde {
    Sra4,
    Sra1,
    Euler,
}

impl From<Sde> for clsk::netsim::SdeScheme {
    fn from(s: Sde) -> Self {
        match s {
            Sde::Sra4 => Self::Sra4,
            Sde::Sra1 => Self::Sra1,
            Sde::Euler => Self::Euler,
        }
    }
}

#[derive(Debug, Args)]
pub struct TransmitArgs {
    /// Bits to send, e.g. 0110.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub bits: Option<String>,
    /// Send this many seeded random bits instead.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Samples per symbol.
    #[arg(long)]
    pub sf: Option<usize>,
    #[arg(long, value_enum, default_value_t = Sde::Sra4)]
    pub sde: Sde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Clsk,
    Csk,
    Dcsk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    Table1,
    Table2,
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Sweep description (TOML). Grid flags are ignored when given.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Noise intensities.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub sf: Vec<usize>,
    /// Fixed bit count per cell instead of a schedule table.
    #[arg(long)]
    pub bits: Option<u64>,
    /// Schedule table; defaults to table2 for pinned designs, table1 otherwise.
    #[arg(long, value_enum)]
    pub schedule: Option<TableArg>,
    /// Cap on bits per cell.
    #[arg(long, default_value_t = clsk::bench::DESK_CAP, conflicts_with = "full_scale")]
    pub desk_cap: u64,
    /// Use the full scheduled bit counts.
    #[arg(long)]
    pub full_scale: bool,
    /// Eb/N0 grid (dB) for CSK and DCSK reference cells.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ebn0: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub baseline_bits: u64,
    #[arg(long, default_value_t = 200)]
    pub baseline_sf: usize,
    /// Only run cells of these schemes.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub scheme: Vec<SchemeArg>,
    #[arg(long, value_enum, default_value_t = Sde::Sra4)]
    pub sde: Sde,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Keep rows already in ber.csv and run only the missing cells.
    #[arg(long)]
    pub resume: bool,
    /// Also write ber.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SpectrogramArgs {
    /// Trace file written by `transmit` (channel.csv).
    #[arg(long)]
    pub input: PathBuf,
    /// Link as two 1-based node numbers, e.g. 1-2. Defaults to the first two nodes in the file.
    #[arg(long)]
    pub link: Option<String>,
    #[arg(long, default_value_t = clsk::bench::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = clsk::bench::DEFAULT_OVERLAP)]
    pub overlap: usize,
    /// Samples per symbol; defaults to the design's spreading factor.
    #[arg(long)]
    pub symbol_samples: Option<usize>,
    /// Sample index where the first symbol starts.
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Example1,
    Example2,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    #[arg(value_enum)]
    pub name: PresetName,
}

/// Error carrying an explicit process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> anyhow::Error {
        Failure { code: exit::USAGE, message: message.into() }.into()
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub mod exit {
    pub const RUNTIME: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DESIGN: u8 = 3;
    pub const DIVERGENCE: u8 = 4;
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(ce) = cause.downcast_ref::<clsk::Error>() {
            use clsk::Error as E;
            return match ce {
                E::Divergence { .. } => exit::DIVERGENCE,
                E::Requirement(_) | E::NoEpsilonRange { .. } => exit::DESIGN,
                E::Config(_)
                | E::InvalidArgument(_)
                | E::UnmappedBit(_)
                | E::Unscheduled(_)
                | E::SeedReuse(_)
                | E::Window(_)
                | E::InvalidPattern(_)
                | E::InvalidSymmetry(_) => exit::USAGE,
                _ => exit::RUNTIME,
            };
        }
    }
    exit::RUNTIME
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
