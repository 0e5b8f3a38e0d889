//! `bri`: batch builder, certifier and leakage evaluator for biregular
//! irreducible functions.
//!
//! Exit codes: 0 on success (also when checks ran and some failed), 1
//! internal error, 2 usage, 3 missing or unreadable file, 4 malformed
//! input, 5 budget exceeded.

mod commands;
mod error;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bri_core::coset::BOUND_SLACK;
use bri_core::spectra::DEFAULT_TOL;
use bri_core::wiretap::{TrendFamily, DEFAULT_LEAKAGE_BUDGET, DEFAULT_RAMANUJAN_CAP, EPS_SWEEP};

use commands::{Ctx, TrendArgs};
use error::{CliError, CliResult};
use output::{Format, Meta};

#[derive(Parser)]
#[command(name = "bri", version, about = "Build, certify and evaluate BRI functions for wiretap coding")]
struct Cli {
    /// RNG seed for signing searches and sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Blahut–Arimoto gap for exact leakages.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Smoothing parameters for leakage bounds, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = EPS_SWEEP.to_vec())]
    eps: Vec<f64>,
    /// Largest dense table (entries) built for exact leakage.
    #[arg(long, global = true, default_value_t = DEFAULT_LEAKAGE_BUDGET)]
    budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Auto,
    Ramanujan,
    Coset,
}

impl From<FamilyArg> for TrendFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Auto => TrendFamily::Auto,
            FamilyArg::Ramanujan => TrendFamily::Ramanujan,
            FamilyArg::Coset => TrendFamily::Coset,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Coset function over GF(2^ℓ) with subfield GF(2^b): message set and λ₂ bounds.
    Coset {
        #[arg(long, short = 'l')]
        degree: u32,
        #[arg(long, short = 'b')]
        sub: u32,
        /// Irreducible modulus in hex; the default is the smallest primitive one.
        #[arg(long)]
        modulus: Option<String>,
        /// Also write the function as a BRI table file.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Split K into 2^k edge-disjoint Ramanujan graphs by repeated 2-lifts.
    Decompose {
        #[arg(long)]
        ds: usize,
        #[arg(long)]
        dx: usize,
        #[arg(long)]
        k: usize,
        /// Directory for edge lists and the induced BRI table.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Check every BRI condition of a table file.
    Certify { file: PathBuf },
    /// Leakage report for a scheme manifest.
    Leakage { manifest: PathBuf },
    /// Bound trend over blocklengths for U = bsc(p).
    Trend {
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long = "n", value_delimiter = ',', default_values_t = vec![4, 6, 8, 10])]
        n_list: Vec<usize>,
        /// ε_n = 2^{−c·n}.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_enum, default_value_t = FamilyArg::Auto)]
        family: FamilyArg,
        /// Eavesdropper crossover probability.
        #[arg(long, default_value_t = 0.3)]
        crossover: f64,
        /// Main channel crossover; noiseless when absent.
        #[arg(long)]
        main_crossover: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_RAMANUJAN_CAP)]
        ramanujan_cap: usize,
    },
    /// Quick run of the invariant suites.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Coset { .. } => "coset",
            Command::Decompose { .. } => "decompose",
            Command::Certify { .. } => "certify",
            Command::Leakage { .. } => "leakage",
            Command::Trend { .. } => "trend",
            Command::Selftest => "selftest",
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    if cli.eps.is_empty() {
        return Err(CliError::usage("--eps needs at least one value"));
    }
    let ctx = Ctx { seed: cli.seed, tol: cli.tol, eps: cli.eps.clone(), budget: cli.budget };
    let meta = Meta {
        tool: "bri",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        seed: cli.seed,
        capacity_tol: cli.tol,
        eps: cli.eps.clone(),
        budget: cli.budget,
        bound_slack: BOUND_SLACK,
        spectral_tol: DEFAULT_TOL,
    };
    let out = match cli.command {
        Command::Coset { degree, sub, modulus, table } => commands::coset(degree, sub, modulus.as_deref(), table.as_deref())?,
        Command::Decompose { ds, dx, k, dir } => commands::decompose(&ctx, ds, dx, k, dir.as_deref())?,
        Command::Certify { file } => commands::certify(&file)?,
        Command::Leakage { manifest } => commands::leakage(&ctx, &manifest)?,
        Command::Trend { r, t, n_list, c, family, crossover, main_crossover, ramanujan_cap } => commands::trend(
            &ctx,
            TrendArgs { r, t, n_list, c, family: family.into(), crossover, main_crossover, ramanujan_cap },
        )?,
        Command::Selftest => selftest::run(&ctx)?,
    };
    output::emit(&meta, &out, cli.format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code())
        }
    }
}
