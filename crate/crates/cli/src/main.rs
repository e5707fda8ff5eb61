//! `ccl`: command-line front end for the ccl-core identity checks and experiments.
//!
//! Exit codes: 0 on success, 1 on usage or contract errors, 2 on numerical
//! failure (quadrature or fit non-convergence).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ccl", version, about = "Shifted convolution sums of Hecke eigenvalues: identity checks and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Wstar,
    Dot,
    Tilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelateKind {
    Pair,
    Triple,
    Divisor,
    Wilton,
    GammaStar,
    Pipeline,
    Scaling,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// q-expansion coefficients a(n) and normalized eigenvalues λ(n).
    Coeffs {
        #[arg(long, value_parser = ["12", "16"])]
        weight: String,
        #[arg(long)]
        upto: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// S(a, b; c) for 1 ≤ c ≤ cmax against the Weil bound.
    Kloosterman {
        #[arg(long, allow_hyphen_values = true)]
        a: i128,
        #[arg(long, allow_hyphen_values = true)]
        b: i128,
        #[arg(long)]
        cmax: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact L² error of the Farey-arc approximation, one row per Q.
    Circle {
        #[arg(long = "Q", num_args = 1.., required = true)]
        q: Vec<u64>,
        /// δ = Q^(−e).
        #[arg(long = "delta-exp", default_value_t = 1.5)]
        delta_exp: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Both sides of the Voronoi formula for Σ λ(n)e(bn/c)W(n/N).
    Voronoi {
        #[arg(long, value_parser = ["12", "16"])]
        weight: String,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        c: u64,
        #[arg(long = "N")]
        n: f64,
        /// Fixed number of dual terms instead of the adaptive cutoff.
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// W★, the holomorphic transform φ̇ or the Maass transform φ̃ on a grid.
    Transform {
        #[arg(long, value_enum)]
        kind: TransformKind,
        /// JSON file with the transform parameters.
        #[arg(long)]
        params: PathBuf,
        /// `start:stop:count` or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Petersson geometric side and ratio residuals for m, n ≤ mmax.
    Petersson {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        mmax: u64,
        #[arg(long)]
        cmax: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Large-sieve ratio for random ±1 vectors on [M, 2M].
    Sieve {
        #[arg(long)]
        kmax: u32,
        #[arg(long = "M")]
        m: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlation experiments driven by a JSON config.
    Correlate {
        #[arg(long, value_enum)]
        kind: CorrelateKind,
        #[arg(long)]
        config: PathBuf,
        /// Report path; `.csv` selects CSV, anything else JSON.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-point rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CCL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("CCL_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("CCL_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ccl_core::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
