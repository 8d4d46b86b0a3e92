//! `shadowkit` command-line front end.
//!
//! Exit codes: 0 success, 2 certification failure, 3 non-convergence, 64 configuration error,
//! 65 parameter jet unavailable.

mod commands;
mod config;
mod output;
mod problem;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shadowkit::Error;

use config::{Overrides, RunConfig};

pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_JET: i32 = 65;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotAContraction { .. }
            | Error::NoDichotomy { .. }
            | Error::ProjectionNotInvariant { .. }
            | Error::Integration { .. } => commands::EXIT_CERT,
            Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
            Error::JetUnavailable(_) => EXIT_JET,
            _ => EXIT_CONFIG,
        };
        let tag = match code {
            EXIT_JET => "jet-unavailable: ",
            EXIT_NONCONVERGENCE => "non-convergence: ",
            _ => "",
        };
        Self {
            code,
            message: format!("{tag}{e}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "shadowkit",
    version,
    about = "Certified shadowing of nonautonomous difference and differential equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Gallery system (cont-sin, cont-rho, disc-toy, disc-forced).
    #[arg(long)]
    gallery: Option<String>,
    /// Gallery or window parameters, `key=value[,key=value...]`; repeatable.
    #[arg(long = "param", short = 'p')]
    params: Vec<String>,
    /// INI file with [system], [window] and [tolerances] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pseudo-orbit table replacing the gallery pseudo-orbit.
    #[arg(long)]
    orbit: Option<PathBuf>,
    /// Picard and jet iteration tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Target for the neglected tails of the kernel integrals.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Accepted residual of the jet equations.
    #[arg(long)]
    jet_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Write the JSON result here as well as to stdout.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the orbit or jet samples here.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Take the absence of nonzero bounded linear solutions as given.
    #[arg(long)]
    assume_no_bounded_solutions: bool,
    /// Run the data-parallel kernels (worker count capped by SHADOWKIT_THREADS).
    #[arg(long)]
    parallel: bool,
}

impl Common {
    fn overrides(self) -> Overrides {
        Overrides {
            gallery: self.gallery,
            params: self.params,
            config: self.config,
            orbit: self.orbit,
            tol: self.tol,
            quad_tol: self.quad_tol,
            jet_tol: self.jet_tol,
            max_iter: self.max_iter,
            out_json: self.out_json,
            out_csv: self.out_csv,
            assume_no_bounded_solutions: self.assume_no_bounded_solutions,
            parallel: self.parallel,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate q, L and the shadowing radius and check the hypotheses.
    Certify(Common),
    /// Solve for the shadow orbit.
    Shadow(Common),
    /// Parameter derivatives of the shadow orbit.
    Jet {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Parameter direction μ, comma-separated (default all ones).
        #[arg(long)]
        direction: Option<String>,
        /// Compare with finite differences at steps h and h/2.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1e-2)]
        fd_step: f64,
    },
    /// Run a worked example end to end and write a markdown report.
    Reproduce {
        /// cont-sin, cont-rho or disc-toy.
        id: String,
        /// Decay rate of the cont-rho example.
        #[arg(long)]
        a: Option<f64>,
        /// Directory for the report and results JSON.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SHADOWKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::config(format!(
            "SHADOWKIT_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Certify(c) => commands::certify(&RunConfig::build(c.overrides())?),
        Command::Shadow(c) => commands::shadow(&RunConfig::build(c.overrides())?),
        Command::Jet {
            common,
            order,
            direction,
            verify,
            fd_step,
        } => {
            let cfg = RunConfig::build(common.overrides())?;
            let req = commands::JetRequest {
                order,
                direction: direction
                    .as_deref()
                    .map(commands::parse_direction)
                    .transpose()?,
                verify,
                fd_step,
            };
            commands::jet(&cfg, &req)
        }
        Command::Reproduce {
            id,
            a,
            out_dir,
            common,
        } => {
            if common.gallery.is_some() || common.config.is_some() || common.orbit.is_some() {
                return Err(CliError::config(
                    "reproduce takes an example id, not --gallery/--config/--orbit",
                ));
            }
            reproduce::reproduce(&id, a, common.overrides(), out_dir.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("shadowkit: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
