use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "recsup", version, about = "Recoverable supports for l1 sparse recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Exit with status 1 when the answer is "no"
    #[arg(long, global = true)]
    pub strict: bool,

    /// Certificate decision tolerance: recoverable iff value < 1 - tol
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_decision: Option<f64>,

    /// Relative rank tolerance for QR diagonals
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_rank: Option<f64>,

    /// Worker threads for trials and enumeration
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,

    /// Output file for machine-readable results
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Where the matrix comes from: a file, or one or more ensemble specs
/// applied left to right (`block:` specs extend the previous matrix).
#[derive(Args, Debug, Clone)]
pub struct MatrixSource {
    /// Matrix text file
    #[arg(long, value_name = "FILE", conflicts_with = "ensemble")]
    pub matrix: Option<PathBuf>,

    /// gaussian:m=M,n=N,seed=S | mb:n=N | block:alpha=A (repeatable)
    #[arg(long, value_name = "SPEC")]
    pub ensemble: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a support/sign pair is recoverable
    Verify {
        #[command(flatten)]
        source: MatrixSource,
        /// Support file
        #[arg(long, value_name = "FILE")]
        support: PathBuf,
    },
    /// Grow a recoverable support of size k
    Grow {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        k: usize,
    },
    /// Remove one index from a recoverable support, keeping it recoverable
    Shrink {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, value_name = "FILE")]
        support: PathBuf,
        /// 1-based index to remove
        #[arg(long)]
        remove: usize,
    },
    /// Write a matrix from ensemble specs
    Generate {
        #[command(flatten)]
        source: MatrixSource,
    },
    /// Count recoverable pairs of every size up to kmax
    Census {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        kmax: usize,
        /// Enumerate even when n exceeds the guard
        #[arg(long)]
        allow_large: bool,
        /// Progress file for resumable runs
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
    },
    /// Print closed-form values and bounds for (m, n, k)
    Bounds {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Fraction of random size-k pairs that are recoverable
    Sample {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Monte Carlo phase-transition grid over Gaussian matrices
    PhaseGrid {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        delta_steps: usize,
        #[arg(long, default_value_t = 10)]
        rho_steps: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Also solve Basis Pursuit in every trial
        #[arg(long)]
        bp: bool,
        /// Run grids with n above 400
        #[arg(long)]
        allow_large: bool,
    },
    /// Compare the certificate decision with Basis Pursuit
    CrossValidate {
        #[command(flatten)]
        source: MatrixSource,
        /// Support file; without it, random trials on fresh Gaussian
        /// matrices shaped like the gaussian ensemble are run
        #[arg(long, value_name = "FILE")]
        support: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Support size for random trials (default: uniform on 1..=m)
        #[arg(long)]
        k: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Verify { source, support } => commands::verify(g, &source, &support),
        Command::Grow { source, k } => commands::grow(g, &source, k),
        Command::Shrink { source, support, remove } => commands::shrink(g, &source, &support, remove),
        Command::Generate { source } => commands::generate(g, &source),
        Command::Census { source, kmax, allow_large, checkpoint } => {
            commands::census(g, &source, kmax, allow_large, checkpoint)
        }
        Command::Bounds { m, n, k } => commands::bounds(g, m, n, k),
        Command::Sample { source, k, trials } => commands::sample(g, &source, k, trials),
        Command::PhaseGrid { n, delta_steps, rho_steps, trials, bp, allow_large } => {
            commands::phase_grid(g, n, delta_steps, rho_steps, trials, bp, allow_large)
        }
        Command::CrossValidate { source, support, trials, k } => {
            commands::cross_validate(g, &source, support.as_deref(), trials, k)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
