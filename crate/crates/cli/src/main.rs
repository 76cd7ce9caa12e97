//! `tribox`: spectra of three particles in a box with harmonic pair coupling.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure (including a
//! failed check in `pt`, `verify` or `asymptote`).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Bad flags, bad config, or an invalid cutoff or grid.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "tribox", version, about = "Symmetry-adapted Rayleigh-Ritz spectra of three particles in a 1D box")]
pub struct Cli {
    /// JSON file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Solve on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Largest energy sum n1²+n2²+n3² in the basis.
    #[arg(long)]
    cutoff: Option<u32>,
    #[arg(long)]
    lmin: Option<f64>,
    #[arg(long)]
    lmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// linear or geometric
    #[arg(long)]
    spacing: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep λ and write one CSV per irrep plus summary.json.
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated irrep labels, e.g. A1g,Eu.
        #[arg(long, value_delimiter = ',')]
        irreps: Option<Vec<String>>,
        /// Levels per irrep written to the CSVs.
        #[arg(long)]
        levels: Option<usize>,
        /// Extra grid points inserted around each avoided crossing.
        #[arg(long)]
        refine: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-order slopes against the closed forms.
    Pt {
        #[arg(long)]
        cutoff: Option<u32>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Scale the q² integrals by 1+EPS before assembly.
        #[arg(long, hide = true, value_name = "EPS")]
        perturb_integrals: Option<f64>,
    },
    /// Symmetry-adapted basis functions as JSON.
    Basis {
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        irreps: Option<Vec<String>>,
    },
    /// Basis labels, H0 and W of one block as JSON.
    DumpBlock {
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long)]
        irrep: String,
        #[arg(long, default_value_t = 0)]
        row: usize,
    },
    /// Brute-force oracle checks.
    Verify {
        /// Single spectrum-equality check at this cutoff (needs --lambda).
        #[arg(long, requires = "lambda")]
        cutoff: Option<u32>,
        #[arg(long, requires = "cutoff")]
        lambda: Option<f64>,
        /// Only compare integrals with quadrature.
        #[arg(long, conflicts_with_all = ["cutoff", "lambda"])]
        quadrature_only: bool,
    },
    /// Large-λ behaviour of the scaled curves.
    Asymptote {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            if commands::is_usage(&e) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
