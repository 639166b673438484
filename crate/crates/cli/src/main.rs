//! `ncfock`: command-line front end writing deterministic JSON reports.

mod commands;
mod input;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ncfock", version, about = "Truncated full Fock space toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of noncommuting variables.
    #[arg(long, global = true, default_value_t = 1)]
    pub d: usize,
    /// Window degree, 4 by default; for `szego`, the series cutoff.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Absolute tolerance for rank and residual decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Allow windows above the size guard.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate a symbol at a matrix point.
    Eval {
        /// Symbol expression or JSON file.
        f: String,
        /// Point [Z_1 ... Z_d] as CSV path or comma-separated constants.
        #[arg(long = "Z")]
        z: String,
    },
    /// Szegő kernel K(Z,W)[P].
    Szego {
        /// Point Z in the row ball, as for `eval`.
        #[arg(long = "Z")]
        z: String,
        /// Point W in the row ball.
        #[arg(long = "W")]
        w: String,
        /// Matrix P as a constant expression or CSV path; identity by default.
        #[arg(long = "P")]
        p: Option<String>,
    },
    /// Window matrix of F(L) with norm, innerness, kernel and range data.
    Mult {
        /// Symbol expression or JSON file.
        f: String,
        /// Dump the window matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve F = G H.
    Douglas { f: String, g: String },
    /// Poisson kernel dilation of a pure row contraction.
    Dilate {
        /// Row block [X_1 ... X_d] as CSV path or comma-separated constants.
        #[arg(long = "X")]
        x: String,
    },
    /// Recover the symbol of an R-invariant normed subspace.
    Dbb {
        /// CSV of window coordinates, one basis vector per column.
        #[arg(long)]
        basis: PathBuf,
        /// CSV gram of the internal norm; the ambient norm by default.
        #[arg(long)]
        gram: Option<PathBuf>,
        /// Coefficient dimension r of the ambient space H² ⊗ C^r.
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
    /// F ∨ G = [F | G].
    Join { f: String, g: String },
    /// F ∧ G with the Γ certificate.
    Meet { f: String, g: String },
    /// Decide F ∼ G.
    Equiv { f: String, g: String },
    /// Lattice axioms on a triple.
    Axioms { f: String, g: String, h: String },
    /// Right ideal containment against range containment.
    Ideal { f: String, g: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
