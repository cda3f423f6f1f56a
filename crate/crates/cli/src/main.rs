//! `iwt`: command-line front end for the immersed-wavelets library.
//!
//! Exit codes: 0 success, 2 bad input (flags, config, files), 3 numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use immersed_wavelets::io::Sweep;
use immersed_wavelets::Error;

#[derive(Parser, Debug)]
#[command(
    name = "iwt",
    version,
    about = "Interpolating wavelet transforms on immersed 2D domains",
    after_help = "Settings come from defaults, then --config, then command-line flags.\n\
                  Exit codes: 0 success, 2 bad input, 3 numerical failure."
)]
pub struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Threshold the multilevel decomposition of a field and report the error.
    Compress(CompressArgs),
    /// One forward (or inverse) transform level of a field file.
    Transform(TransformArgs),
    /// Adaptive diffusion run around the configured body.
    Diffuse(DiffuseArgs),
    /// Lebesgue-constant ratios of the interpolating predictors.
    Lebesgue(LebesgueArgs),
    /// Log-log slope of a two-column CSV such as (h, error).
    Convergence(ConvergenceArgs),
    /// Sample a scaling function by cascading a unit impulse.
    ScalingFunction(ScalingArgs),
}

/// Flags shared by the commands that build a grid.
#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Wavelet as N.Ntilde, e.g. 6.2.
    #[arg(long, value_name = "N.NT")]
    pub wavelet: Option<String>,

    /// Geometry as inline JSON, a JSON file, or one of: star, none.
    #[arg(long, value_name = "JSON")]
    pub geometry: Option<String>,

    /// Prefix of the output files.
    #[arg(long, value_name = "PREFIX")]
    pub out_prefix: Option<String>,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Finest level (the field is sampled on a 2^L grid).
    #[arg(long, value_name = "L")]
    pub max_level: Option<u32>,

    /// Number of forward transforms.
    #[arg(long)]
    pub levels: Option<usize>,

    /// Detail threshold.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Geometric threshold sweep, from:to:count; overrides --eps.
    #[arg(long, value_name = "FROM:TO:COUNT")]
    pub sweep: Option<Sweep>,

    /// Field file to compress instead of 100 sin(4 pi x) sin(4 pi y).
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Output CSV (default PREFIX_compress.csv).
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,

    /// Also write an SVG plot of Einf against eps.
    #[arg(long, value_name = "SVG")]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Level of the sampled test field when no --input is given.
    #[arg(long, value_name = "L")]
    pub level: Option<u32>,

    /// Field (or, with --inverse, coefficient) file.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Run the inverse transform.
    #[arg(long)]
    pub inverse: bool,

    /// Output field file (default PREFIX_coeffs.iwf or PREFIX_field.iwf).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DiffuseArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Refinement threshold at the base level.
    #[arg(long)]
    pub eps_r: Option<f64>,

    /// eps_r / eps_c.
    #[arg(long)]
    pub eps_ratio: Option<f64>,

    /// Level-dependence exponent of the thresholds.
    #[arg(long)]
    pub k: Option<u32>,

    /// Steps between adaptation events.
    #[arg(long)]
    pub cadence: Option<usize>,

    #[arg(long, value_name = "T")]
    pub tfinal: Option<f64>,

    /// dt / h^2.
    #[arg(long)]
    pub fourier: Option<f64>,

    #[arg(long, value_name = "L")]
    pub start_level: Option<u32>,

    #[arg(long, value_name = "L")]
    pub min_level: Option<u32>,

    #[arg(long, value_name = "L")]
    pub max_level: Option<u32>,

    /// Compute a fixed-resolution reference at this level.
    #[arg(long, value_name = "L")]
    pub ref_level: Option<u32>,

    /// Reference field file from an earlier run; overrides --ref-level.
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,

    /// Ghost-fit radius in grid spacings.
    #[arg(long)]
    pub ghost_radius: Option<f64>,

    /// Geometric eps_r sweep, from:to:count; overrides --eps-r.
    #[arg(long, value_name = "FROM:TO:COUNT")]
    pub sweep: Option<Sweep>,
}

#[derive(Args, Debug)]
pub struct LebesgueArgs {
    /// Order to report; all even orders up to 12 when omitted.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,

    /// Boundary offset for the ratio with a boundary value.
    #[arg(long)]
    pub psi: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    /// CSV with a header row; the first two columns are used.
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,

    /// Also write an SVG plot of the data.
    #[arg(long, value_name = "SVG")]
    pub plot: Option<PathBuf>,

    /// Slope of the dashed guide in the plot.
    #[arg(long)]
    pub guide: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Context {
    Free,
    Type1,
    Type2,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    #[arg(long, default_value_t = 6)]
    pub refinements: usize,

    #[arg(long, value_enum, default_value_t = Context::Free)]
    pub context: Context,

    /// Boundary offset in coarse units for --context type2.
    #[arg(long, default_value_t = 0.5)]
    pub offset: f64,

    /// Coarse point carrying the impulse, counted from the boundary.
    #[arg(long, default_value_t = 0)]
    pub node: usize,

    /// Output CSV (default PREFIX_scaling.csv).
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

/// An error together with the operation that raised it.
pub struct Failure {
    pub op: &'static str,
    pub err: Error,
}

pub trait WithOp<T> {
    fn op(self, op: &'static str) -> Result<T, Failure>;
}

impl<T> WithOp<T> for Result<T, Error> {
    fn op(self, op: &'static str) -> Result<T, Failure> {
        self.map_err(|err| Failure { op, err })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { op, err }) => {
            eprintln!("error: {op}: {err}");
            ExitCode::from(if err.is_config_error() { 2 } else { 3 })
        }
    }
}
