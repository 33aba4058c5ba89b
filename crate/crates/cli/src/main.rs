//! `fockzero`: point evaluation, norm traces, density profiles and the full
//! verification suite, written as CSV.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{read_config_file, Overrides, RunConfig};

/// Exit codes.
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ADVISORY: u8 = 3;

/// A reason to stop, with the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(e: fockzero::Error) -> Self {
        Self::config_msg(e.to_string())
    }

    pub fn config_msg(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    /// Numerical errors during a run.
    pub fn numeric(e: fockzero::Error) -> Self {
        Self {
            code: EXIT_ASSERTION,
            message: e.to_string(),
        }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        Self::config_msg(format!("output error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "fockzero", version, about = "Perturbed-lattice sigma products and Fock-space zero-set checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Gaussian weight parameter (default pi, giving lattice pitch 1).
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Real-row shift R (> 0).
    #[arg(long = "R", global = true)]
    r_shift: Option<f64>,

    /// Comma-separated norm exponents.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,

    #[arg(long = "rho-max", global = true)]
    rho_max: Option<f64>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// key = value file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Truncation tolerance for the infinite products.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long = "m-min", global = true)]
    m_min: Option<usize>,

    #[arg(long = "max-doublings", global = true)]
    max_doublings: Option<u32>,

    /// Radial quadrature step in units of the lattice pitch.
    #[arg(long = "radial-step", global = true)]
    radial_step: Option<f64>,

    /// Angular arc step in units of the lattice pitch.
    #[arg(long = "angular-step", global = true)]
    angular_step: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate log-magnitudes at points given as re,im.
    Eval {
        target: EvalTarget,
        #[arg(required = true)]
        points: Vec<String>,
    },
    /// Dyadic norm trace and growth exponent per p.
    Norm,
    /// Density profile of the square and the perturbed lattice.
    Density,
    /// Run every check and write one CSV per check plus summary.txt.
    Verify,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalTarget {
    Sigma,
    Modified,
    Psi,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            r_shift: self.r_shift,
            p: self.p.clone(),
            rho_max: self.rho_max,
            seed: self.seed,
            out: self.out.clone(),
            tol: self.tol,
            m_min: self.m_min,
            max_doublings: self.max_doublings,
            radial_step: self.radial_step,
            angular_step: self.angular_step,
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FOCKZERO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config_msg(format!("FOCKZERO_THREADS must be a positive integer (got {raw:?})")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config_msg(format!("cannot size thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => Overrides::default(),
    };
    let cfg = RunConfig::resolve(cli.overrides().layered_over(file))?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(Failure::io)?;
    match cli.command {
        Command::Eval { target, points } => commands::eval(&cfg, target, &points),
        Command::Norm => commands::norm(&cfg),
        Command::Density => commands::density(&cfg),
        Command::Verify => commands::verify(&cfg),
    }
}

/// A point such as `-1,0` would otherwise be read as a short flag; a leading
/// space keeps it positional and is trimmed when the point is parsed.
fn protect_negative_points(arg: String) -> String {
    let b = arg.as_bytes();
    if b.len() > 1 && b[0] == b'-' && (b[1].is_ascii_digit() || b[1] == b'.') && arg.contains(',') {
        format!(" {arg}")
    } else {
        arg
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(std::env::args().map(protect_negative_points));
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
