//! `hermflow` batch entry point. Every subcommand prints one JSON summary
//! line and writes its artifacts under the output directory.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use hermflow::Error;
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "hermflow", version, about = "Solenoidal Hermite spectral toolkit")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Output directory; the HERMFLOW_OUT environment variable takes precedence.
    #[arg(long, global = true, default_value = "hermflow-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat JSON file of flag values; explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Export a solenoidal basis with its Gram matrix.
    Basis(BasisArgs),
    /// Check level counts and eigen-relations of the Hermite polynomials.
    EigCheck(EigArgs),
    /// Check the bi-orthogonality pairing.
    Biortho(EigArgs),
    /// Validate the solenoidal fixtures against the computed kernels.
    Solenoidal(SolenoidalArgs),
    /// Tabulate the kernel F and optionally fit its envelope.
    Kernel(KernelArgs),
    /// Closed-form WKBJ constants of the kernel tail.
    Wkbj(WkbjArgs),
    /// Interaction tensor of the Leray-projected convection term.
    DTensor(TensorArgs),
    /// Evolve expansion coefficients in rescaled time.
    Evolve(EvolveArgs),
    /// Track nodal sets along an evolution.
    Nodal(NodalArgs),
    /// Classify the zero of a field at the origin.
    Classify(ClassifyArgs),
    /// Cross-check coefficient decay against the exact semigroup on a grid.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// fixture or kernel.
    #[arg(long, default_value = "fixture")]
    pub source: String,
}

#[derive(Args, Debug)]
pub struct EigArgs {
    /// Comma-separated orders m.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m: Vec<u32>,
    #[arg(long = "N", default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub max_level: u32,
}

#[derive(Args, Debug)]
pub struct SolenoidalArgs {
    /// Comma-separated orders m with fixtures.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub m: Vec<u32>,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long = "N", default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 32.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    /// Fit the oscillation envelope and compare with the WKBJ constants.
    #[arg(long)]
    pub fit: bool,
}

#[derive(Args, Debug)]
pub struct WkbjArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long = "N", default_value_t = 3)]
    pub dim: usize,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Box half-width.
    #[arg(long = "L", default_value_t = 8.0)]
    pub half_width: f64,
    /// Points per axis.
    #[arg(long = "n", default_value_t = 32)]
    pub n: usize,
    #[arg(long)]
    pub dealias: bool,
}

#[derive(Args, Debug)]
pub struct TensorArgs {
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub max_level: u32,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Estimate errors by recomputing on a finer grid.
    #[arg(long)]
    pub refine: bool,
    /// Also check idempotence, solenoidality and gradient annihilation.
    #[arg(long)]
    pub projector_check: bool,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// stokes, nse or burnett.
    #[arg(long, default_value = "stokes")]
    pub model: String,
    /// fixture:K:I, random, or a field "p1; p2; p3" in y1, y2, y3.
    #[arg(long, default_value = "fixture:1:0")]
    pub data: String,
    #[arg(long, default_value_t = 3.0)]
    pub tau: f64,
    /// Number of output intervals (even).
    #[arg(long, default_value_t = 60)]
    pub outputs: usize,
    /// Highest basis level (default: at least 2 and the data level).
    #[arg(long)]
    pub max_level: Option<u32>,
    #[arg(long, default_value_t = 1e-2)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub refine: bool,
    /// For nse: compare the zero-tensor run with the exact linear flow and
    /// report the Duhamel residual.
    #[arg(long)]
    pub consistency: bool,
}

#[derive(Args, Debug)]
pub struct NodalArgs {
    #[arg(long, default_value = "stokes")]
    pub model: String,
    #[arg(long)]
    pub data: String,
    /// Field whose zero set is the target (same syntax as --data).
    #[arg(long)]
    pub reference: String,
    /// Component index, 1-based.
    #[arg(long, default_value_t = 2)]
    pub component: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub taus: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub cell: f64,
    /// Distance the final nodal set must reach.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long)]
    pub max_level: Option<u32>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Components in x1, x2, x3 and t separated by ';', e.g. "x1*x2 - t^2".
    #[arg(long, conflicts_with = "sweep")]
    pub field: Option<String>,
    /// Check x^σ − (−t)^K for all M, K up to this bound.
    #[arg(long)]
    pub sweep: Option<u32>,
    #[arg(long, default_value_t = 8)]
    pub max_order: u32,
    #[arg(long, default_value_t = 1e-7)]
    pub threshold: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub levels: Vec<u32>,
    #[arg(long, default_value_t = 3.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 6)]
    pub steps: usize,
    #[arg(long = "L", default_value_t = 12.0)]
    pub half_width: f64,
    #[arg(long = "n", default_value_t = 96)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

/// A finished command: its summary line and whether its checks passed.
pub struct Outcome {
    pub summary: serde_json::Value,
    pub pass: bool,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let out = std::env::var_os("HERMFLOW_OUT")
        .map(PathBuf::from)
        .unwrap_or(cli.out);
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: {}: {e}", out.display());
        return ExitCode::FAILURE;
    }
    match commands::run(cli.command, &out) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
        Err(e) => {
            let code = match e {
                Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                Error::Io(_) => 1,
                _ => EXIT_VALIDATION,
            };
            println!(
                "{}",
                serde_json::json!({"schema": hermflow::SCHEMA, "pass": false, "error": e.to_string()})
            );
            ExitCode::from(code)
        }
    }
}
