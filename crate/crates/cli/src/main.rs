//! Command-line front end: simulations, coupling sweeps, spectral-gap
//! tables, closed-form evaluation, numeric-vs-analytic comparison, and the
//! self-verification suite. Plot-ready CSV for curves, JSON for structured
//! reports; every run is bit-for-bit reproducible from its flags (nothing in
//! the pipeline is randomized).

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use opgrowth_core::{Error as CoreError, ModelKind, ModelSpec, SizeDefinition};

mod commands;
mod output;

/// Exit statuses: 0 success, 1 usage, 2 numerical failure, 3 verification
/// failure.
const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "opgrowth",
    about = "Operator-size dynamics in open Brownian SYK models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one model and write moment (and optionally distribution) curves.
    Simulate(SimulateArgs),
    /// Propagate a list of coupling ratios and aggregate the moments.
    Sweep(SweepArgs),
    /// Second-largest-eigenvalue table over a list of system sizes.
    Spectrum(SpectrumArgs),
    /// Evaluate the infinite-N closed forms on a time grid.
    Analytic(AnalyticArgs),
    /// Compare finite-N propagation with the matching closed forms.
    Compare(CompareArgs),
    /// Run the spin-representation and structural verification suites.
    Verify(VerifyArgs),
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s {
        "A" | "a" => Ok(ModelKind::A),
        "B" | "b" => Ok(ModelKind::B),
        _ => Err(format!("invalid model {s:?}; expected A or B")),
    }
}

fn parse_definition(s: &str) -> Result<SizeDefinition, String> {
    match s {
        "1" | "I" | "i" => Ok(SizeDefinition::DefI),
        "2" | "II" | "ii" => Ok(SizeDefinition::DefII),
        _ => Err(format!("invalid definition {s:?}; expected 1 or 2")),
    }
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Model kind: A (hopping + three-fermion bath coupling) or B (hopping +
    /// intra-system four-fermion interaction).
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,

    /// Operator-size definition: 1 (system fermions of the full evolution)
    /// or 2 (after the bath trace).
    #[arg(long, value_parser = parse_definition)]
    definition: SizeDefinition,

    /// Hopping rate V1.
    #[arg(long, default_value_t = 0.0)]
    v1: f64,

    /// Three-fermion bath coupling rate V3 (Model A only).
    #[arg(long, default_value_t = 0.0)]
    v3: f64,

    /// Intra-system four-fermion rate V4 (Model B only).
    #[arg(long, default_value_t = 0.0)]
    v4: f64,

    /// Number of system Majorana fermions N.
    #[arg(long, short = 'n', default_value_t = 100)]
    n: usize,
}

impl SpecArgs {
    fn build(&self) -> Result<ModelSpec, CoreError> {
        ModelSpec::new(self.model, self.definition, self.v1, self.v3, self.v4, self.n)
    }
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Final time of the uniform grid; defaults to 5 / max coupling rate.
    #[arg(long)]
    t_max: Option<f64>,

    /// Number of grid points (including t = 0).
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<std::path::PathBuf>,

    /// Output format for tabular commands.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,

    /// Propagator: dense matrix exponential or adaptive Runge-Kutta.
    #[arg(long, default_value = "expm", value_parser = ["expm", "ode"])]
    propagator: String,

    /// Relative tolerance of the Runge-Kutta propagator.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,

    /// Absolute tolerance of the Runge-Kutta propagator.
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,

    /// Also write the full size distributions (CSV `t,n,p`) to this path.
    #[arg(long)]
    distributions: Option<std::path::PathBuf>,

    /// Dump the assembled generator (CSV `row,col,value`) to this path.
    #[arg(long)]
    dump_generator: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,

    /// Coupling ratios V1/V3 (Model A) or V1/V4 (Model B); V1 is set to
    /// ratio * interaction rate for each entry.
    #[arg(long, value_delimiter = ',', required = true)]
    ratio_list: Vec<f64>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    out: OutputArgs,

    /// System sizes to scan.
    #[arg(long, value_delimiter = ',', default_value = "20,24,28,32,36,40,44,48,52,56,60")]
    n_list: Vec<usize>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,

    /// Also evaluate the generating function z(mu, t) at this mu.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,

    /// Tolerance on the relative mean-size error.
    #[arg(long, default_value_t = 0.05)]
    tol_mean: f64,

    /// Tolerance on the distribution sup-norm error (relative to the peak).
    #[arg(long, default_value_t = 0.05)]
    tol_dist: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    out: OutputArgs,

    /// Largest system size exercised by the spin-representation oracle.
    #[arg(long, default_value_t = 12)]
    max_spin_n: usize,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<CoreError>() {
        match core {
            CoreError::InvalidSpec(_) | CoreError::Domain(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        }
    } else {
        EXIT_NUMERICAL
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits; everything
            // else is a usage error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Analytic(args) => commands::analytic(args),
        Command::Compare(args) => commands::compare(args),
        Command::Verify(args) => commands::verify(args),
    };

    match outcome {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerificationFailed) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
