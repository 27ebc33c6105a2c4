//! `wavetrap` — certified trapped-mode bounds for periodically obstructed
//! waveguides, from the command line.
//!
//! Exit codes: 0 success, 1 configuration or input error (bad JSON, schema
//! violation, misaligned grid, missing artifacts), 2 computational failure
//! (a class could not be certified, a certified class lacks a discrete
//! confirmation, residuals above the gate, eigensolver non-convergence).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_grid_flag, resolve, Overrides, RunConfig};
use wavetrap_core::Error;

#[derive(Parser)]
#[command(
    name = "wavetrap",
    version,
    about = "Certify and independently confirm trapped modes in obstructed waveguides"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a test function per symmetry class and write existence
    /// certificates (certificates.json, summary.csv)
    Certify {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent)
        #[arg(long)]
        out: PathBuf,
        /// Optimizer evaluation budget (overrides the config file)
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Solve the class-restricted discrete spectrum and confirm each
    /// certificate from below its threshold (modes.csv, field tables)
    Solve {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent)
        #[arg(long)]
        out: PathBuf,
        /// Optimizer evaluation budget for the embedded certification
        #[arg(long)]
        budget: Option<usize>,
        /// Grid override as hx,hy,L (for example 0.0625,0.0625,8)
        #[arg(long, value_name = "HX,HY,L")]
        grid: Option<String>,
        /// Total number of eigenpairs across classes
        #[arg(long)]
        k: Option<usize>,
        /// Also run the step-halving / domain-lengthening convergence study
        /// (convergence.csv)
        #[arg(long)]
        study: bool,
    },
    /// Recompute decomposition and quotient-assembly residuals as CSV
    Verify {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Optional directory for residuals.csv (stdout either way)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use a deliberately coarse quadrature and disable the residual gate
        #[arg(long)]
        coarse: bool,
    },
    /// Join certificates with discrete modes into report.md plus plot-ready
    /// slice tables
    Report {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Directory holding certify (and optionally solve) artifacts
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::CertificationFailed { .. } | Error::ConvergenceFailure(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Certify {
            config,
            out,
            budget,
        } => {
            let cfg = RunConfig::load(&config)?;
            let run = resolve(
                &cfg,
                &Overrides {
                    budget,
                    ..Overrides::default()
                },
            )?;
            commands::cmd_certify(&run, &out)
        }
        Command::Solve {
            config,
            out,
            budget,
            grid,
            k,
            study,
        } => {
            let cfg = RunConfig::load(&config)?;
            let grid = grid.as_deref().map(parse_grid_flag).transpose()?;
            let run = resolve(&cfg, &Overrides { budget, grid, k })?;
            commands::cmd_solve(&run, &out, study)
        }
        Command::Verify {
            config,
            out,
            coarse,
        } => {
            let cfg = RunConfig::load(&config)?;
            commands::cmd_verify(&cfg, out.as_deref(), coarse)
        }
        Command::Report { config, out } => {
            let cfg = RunConfig::load(&config)?;
            commands::cmd_report(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep exit 2 reserved for computational failures: help and
            // version exit 0, usage errors exit 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
