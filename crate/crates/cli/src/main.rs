//! `weyl`: batch runs of the spectral, scattering, sum-rule and condition
//! pipelines, writing CSV/JSON reports and optional SVG plots.
//!
//! Exit codes:
//! - 0: success, all checks passed
//! - 1: configuration error (bad file, bad value, unreadable input, output not writable)
//! - 2: numerical failure (nothing is written)
//! - 3: a tolerance or condition check failed (the report is still written)

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure in {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "weyl", version, about = "Spectral and scattering reports for half-line Schrodinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (default: the config's `out`, else ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also write SVG line charts.
    #[arg(long, global = true)]
    plot: bool,

    #[arg(long, global = true, value_name = "X")]
    ode_tol: Option<f64>,

    #[arg(long, global = true, value_name = "X")]
    quad_tol: Option<f64>,

    /// Upper momentum cutoff for half-line integrals.
    #[arg(long, global = true, value_name = "X")]
    kmax: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bound states of both operators, spectral density, interlacing.
    Spectrum,
    /// Scattering scan over the k-grid and the quasi-Szego integral.
    Scatter,
    /// Faddeev-Zakharov sum rule, Poisson identity and step-by-step ladder.
    Sumrule,
    /// Measure-side conditions for the potential or a loaded measure.
    Conditions,
    /// Potential samples, nu and the spectral measure in loadable form.
    Export,
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let over = Overrides {
        out: cli.out.clone(),
        plot: cli.plot,
        ode_tol: cli.ode_tol,
        quad_tol: cli.quad_tol,
        kmax: cli.kmax,
    };
    let cfg = RunConfig::load(path, &over)?;
    let result = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Scatter => commands::scatter(&cfg)?,
        Command::Sumrule => commands::sumrule(&cfg)?,
        Command::Conditions => commands::conditions(&cfg)?,
        Command::Export => commands::export(&cfg)?,
    };
    for p in result.artifacts.write(&cfg.out_dir())? {
        println!("wrote {}", p.display());
    }
    print!("{}", result.summary);
    if !result.summary.ends_with('\n') {
        println!();
    }
    Ok(result.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // Usage mistakes are configuration errors; --help and --version are not.
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed; see the report");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("weyl: {e}");
            ExitCode::from(e.code())
        }
    }
}
