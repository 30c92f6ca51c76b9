//! `coexist`: joint-measurability verdicts, joint observables, sharpness
//! measures and approximation boundaries for qubit observables.
//!
//! Exit status: 0 on success (or a jointly measurable verdict), 1 for a
//! verdict of not jointly measurable or an infeasible construction, 2 for
//! an undetermined verdict, 3 when a boundary or verdict fails its oracle
//! check, 64 for invalid input and 70 for internal errors.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use input::{parse_radians, parse_triple, UsageError};

const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "coexist", version, about = "Joint measurability of qubit observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether two simple observables are jointly measurable.
    Check(CheckArgs),
    /// Build a joint observable and verify it.
    #[command(subcommand)]
    Construct(Construction),
    /// Sharpness and distances of a simple observable.
    Measures(MeasuresArgs),
    /// Trace the optimal approximation boundary for two sharp targets.
    Boundary(BoundaryArgs),
    /// Compare the decision procedure with the brute-force grid search.
    Verify(VerifyArgs),
}

/// Observables are `{"alpha": α, "a": [x, y, z]}` for the "+" effect,
/// inline or as a path to a JSON file.
#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub o1: String,
    #[arg(long)]
    pub o2: String,
    #[arg(long, default_value_t = coexist_core::jointness::DEFAULT_DECISION_TOL)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum Construction {
    /// Symmetrized product of E^{1,a} and E^{1,b}.
    Jordan {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        a: [f64; 3],
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        b: [f64; 3],
    },
    /// Covariant joint observable with parameters gamma, p and axis u.
    Covariant {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        a: [f64; 3],
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        b: [f64; 3],
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        p: f64,
        /// Axis orthogonal to a and b; defaults to the normalized a × b.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        u: Option<[f64; 3]>,
    },
    /// Non-covariant joint observable with skew parameter t.
    Skewed {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        a: [f64; 3],
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        b: [f64; 3],
        #[arg(long)]
        t: f64,
    },
    /// Covariant average of a joint observable (by default the skewed one).
    Symmetrize {
        /// Joint observable `{"gpp": .., "gpm": .., "gmp": .., "gmm": ..}`.
        #[arg(long, conflicts_with_all = ["a", "b", "t"])]
        joint: Option<String>,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        a: Option<[f64; 3]>,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        b: Option<[f64; 3]>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        u: Option<[f64; 3]>,
    },
    /// Product joint observable of two commuting observables.
    Product {
        #[arg(long)]
        o1: String,
        #[arg(long)]
        o2: String,
    },
    /// Joint observable of an ordered pair of effects.
    Trivial {
        #[arg(long)]
        o1: String,
        #[arg(long)]
        o2: String,
    },
}

#[derive(Args, Debug)]
pub struct MeasuresArgs {
    #[arg(long)]
    pub o: String,
    /// Axis of a sharp observable to measure the distance to.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub n: Option<[f64; 3]>,
    /// Second observable to measure the distance to.
    #[arg(long)]
    pub other: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    /// Angle between the target axes in radians, in (0, π/2].
    #[arg(long, value_parser = parse_radians)]
    pub theta: f64,
    /// Number of uniformly spaced d1 values on [0, ½ sin θ].
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Re-check samples against the brute-force oracle.
    #[arg(long)]
    pub verify: bool,
    /// Oracle resolution used by --verify.
    #[arg(long, default_value_t = 128)]
    pub resolution: usize,
    /// Check every STRIDE-th sample (and the last) with --verify.
    #[arg(long, default_value_t = 8)]
    pub stride: usize,
    /// Points per axis of the solver's starting grid.
    #[arg(long, default_value_t = 96)]
    pub solver_grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub o1: String,
    #[arg(long)]
    pub o2: String,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    #[arg(long, default_value_t = coexist_core::jointness::DEFAULT_DECISION_TOL)]
    pub tol: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Check(a) => commands::check(a),
        Command::Construct(c) => commands::construct(c),
        Command::Measures(a) => commands::measures(a),
        Command::Boundary(a) => commands::boundary(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
