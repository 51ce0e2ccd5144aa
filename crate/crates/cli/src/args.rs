use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtnmap::ConductivityMode;

#[derive(Parser, Debug)]
#[command(
    name = "dtnmap",
    version,
    about = "Asymptotic DtN quadratic form of dense disk composites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a packing file.
    Gen(GenArgs),
    /// Energy breakdown for one boundary potential.
    Analyze(AnalyzeArgs),
    /// Network DtN matrix and the network itself.
    Dtn(DtnArgs),
    /// Breakdown of cos kθ over a range of k.
    Sweep(SweepArgs),
    /// Compare the asymptotic form with the spectral solver.
    Validate(ValidateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Identical,
    Generalized,
}

impl From<Mode> for ConductivityMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Identical => ConductivityMode::Identical,
            Mode::Generalized => ConductivityMode::Generalized,
        }
    }
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NetworkArgs {
    /// Packing JSON file.
    #[arg(long)]
    pub packing: PathBuf,
    #[arg(long, value_enum, default_value = "identical")]
    pub mode: Mode,
    /// Drop gap edges wider than this.
    #[arg(long)]
    pub delta_max_edge: Option<f64>,
}

/// Fourier coefficients given as `k=a`.
#[derive(Args, Debug, Default)]
pub struct PotentialArgs {
    #[arg(long = "cos", value_name = "K=A", value_parser = parse_coeff)]
    pub cos: Vec<(usize, f64)>,
    #[arg(long = "sin", value_name = "K=A", value_parser = parse_coeff)]
    pub sin: Vec<(usize, f64)>,
}

fn parse_coeff(s: &str) -> Result<(usize, f64), String> {
    let (k, a) = s
        .split_once('=')
        .ok_or_else(|| format!("expected K=A, got {s:?}"))?;
    let k = k
        .trim()
        .parse()
        .map_err(|_| format!("bad frequency {k:?}"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad coefficient {a:?}"))?;
    if !a.is_finite() {
        return Err(format!("coefficient {a} is not finite"));
    }
    Ok((k, a))
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// N equal disks equally spaced on a circle.
    Ring {
        #[arg(long)]
        n: usize,
        /// Radius of the circle through the centers.
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        domain_radius: f64,
    },
    /// Ring whose neighbor and boundary gaps both equal ratio·R.
    EqualGapRing {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 1.0)]
        domain_radius: f64,
    },
    /// Hexagonal patch with uniform gap.
    Grid {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        domain_radius: f64,
    },
    /// Rejection-sampled disks with a minimum gap.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        delta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        domain_radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct DtnArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long)]
    pub k_from: usize,
    #[arg(long)]
    pub k_to: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Packing JSON file; repeat to get a trend table.
    #[arg(long, required = true)]
    pub packing: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "identical")]
    pub mode: Mode,
    #[arg(long)]
    pub delta_max_edge: Option<f64>,
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Oracle truncation order; chosen from the geometry when absent.
    #[arg(long)]
    pub oracle_m: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}
