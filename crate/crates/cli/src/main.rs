//! Command-line front end: reads a JSON document describing a graph
//! presentation plus optional cocycle, homotopy, groupoid, and function
//! sections, runs one check or computation, and prints a deterministic
//! report.
//!
//! Exit codes: 0 all checks passed, 1 violations or boundary failures found,
//! 2 unusable input (malformed document, unknown names, bad flags).

mod commands;
mod doc;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use kgraphs::{DegreeVec, IntVec, LatticeBox};

use crate::commands::{Ctx, Outcome};
use crate::doc::{build_window, input_err, Document, Mode};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

#[derive(Parser)]
#[command(
    name = "kgraphs",
    version,
    about = "Checks and computations for higher-rank graph presentations, \
             2-cocycles, skew products, twisted convolution, and K-theory data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check square pairing, confluence, and factorization counts
    Validate(CommonArgs),
    /// Brute-force the 2-cocycle identity and normalization up to a bound
    CheckCocycle(CommonArgs),
    /// Decide whether two cocycles differ by a coboundary on a bound
    Cohomologous(CommonArgs),
    /// Build the skew product over a lattice window and validate it
    Skew(CommonArgs),
    /// Solve b(s(e)) - b(r(e)) = d(e) for a vertex potential, or report the
    /// obstructing cycle
    SolveDb(CommonArgs),
    /// Evaluate the path-groupoid cocycle on lag pairs and verify its
    /// identity on lag triples
    SigmaC(CommonArgs),
    /// Twisted convolution and involution of two named functions
    Convolve(CommonArgs),
    /// Sample the I-norm of an interpolation bundle and certify continuity
    INormScan(CommonArgs),
    /// Level vertex sets and multiplicity matrices of the diagonal tower
    Bratteli(CommonArgs),
    /// Truncated K_0 data of the diagonal tower
    K0(CommonArgs),
    /// Recompute ordered K_0 data along a cocycle homotopy grid
    HomotopyReport(CommonArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::Validate(a) => ("validate", a),
            Command::CheckCocycle(a) => ("check-cocycle", a),
            Command::Cohomologous(a) => ("cohomologous", a),
            Command::Skew(a) => ("skew", a),
            Command::SolveDb(a) => ("solve-db", a),
            Command::SigmaC(a) => ("sigma-c", a),
            Command::Convolve(a) => ("convolve", a),
            Command::INormScan(a) => ("i-norm-scan", a),
            Command::Bratteli(a) => ("bratteli", a),
            Command::K0(a) => ("k0", a),
            Command::HomotopyReport(a) => ("homotopy-report", a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Input document (JSON)
    document: PathBuf,
    /// Total-degree bound "m,n,..." for exhaustive checks
    #[arg(long)]
    bound: Option<String>,
    /// Truncation depth "m,n,..." for infinite path approximants
    #[arg(long)]
    depth: Option<String>,
    /// Lattice window "lo..hi,lo..hi,...", one range per color
    #[arg(long)]
    window: Option<String>,
    /// Number of grid points on [0,1] for homotopies and bundles
    #[arg(long)]
    grid: Option<usize>,
    /// Truncation level for tower data
    #[arg(long)]
    levels: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Insist on exact rational phases (the default)
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Accept decimal angles and compare at fixed tolerance
    #[arg(long)]
    float: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

fn parse_degree_flag(name: &str, s: &str) -> Result<DegreeVec, CliError> {
    let parts: Result<Vec<u32>, _> = s.split(',').map(|p| p.trim().parse::<u32>()).collect();
    parts
        .map(DegreeVec)
        .map_err(|_| input_err(format!("cannot parse --{name} \"{s}\" (want \"m,n,...\")")))
}

fn parse_window_flag(s: &str) -> Result<LatticeBox, CliError> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(',') {
        let (l, h) = part
            .split_once("..")
            .ok_or_else(|| input_err(format!("window axis \"{part}\" is not \"lo..hi\"")))?;
        lo.push(l.trim().parse::<i64>().map_err(|_| {
            input_err(format!("window axis \"{part}\" has a non-integer endpoint"))
        })?);
        hi.push(h.trim().parse::<i64>().map_err(|_| {
            input_err(format!("window axis \"{part}\" has a non-integer endpoint"))
        })?);
    }
    LatticeBox::new(IntVec(lo), IntVec(hi))
        .ok_or_else(|| input_err(format!("window \"{s}\" is empty")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.parts();
    match run(name, args) {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(name: &'static str, args: &CommonArgs) -> Result<ExitCode, CliError> {
    if args.format == Format::Dot && name != "bratteli" {
        return Err(input_err("dot output is only available for bratteli"));
    }
    let document = Document::load(&args.document)?;
    let window = match &args.window {
        Some(s) => Some(parse_window_flag(s)?),
        None => match &document.window {
            Some(spec) => Some(build_window(spec)?),
            None => None,
        },
    };
    let ctx = Ctx {
        doc: &document,
        bound: args
            .bound
            .as_deref()
            .map(|s| parse_degree_flag("bound", s))
            .transpose()?,
        depth: args
            .depth
            .as_deref()
            .map(|s| parse_degree_flag("depth", s))
            .transpose()?,
        window,
        grid: args.grid,
        levels: args.levels,
        mode: Mode { float: args.float },
    };
    let outcome = match name {
        "validate" => commands::validate(&ctx)?,
        "check-cocycle" => commands::check_cocycle(&ctx)?,
        "cohomologous" => commands::cohomologous(&ctx)?,
        "skew" => commands::skew_cmd(&ctx)?,
        "solve-db" => commands::solve_db(&ctx)?,
        "sigma-c" => commands::sigma_c_cmd(&ctx)?,
        "convolve" => commands::convolve_cmd(&ctx)?,
        "i-norm-scan" => commands::i_norm_scan_cmd(&ctx)?,
        "bratteli" => commands::bratteli_cmd(&ctx)?,
        "k0" => commands::k0_cmd(&ctx)?,
        "homotopy-report" => commands::homotopy_report(&ctx)?,
        _ => unreachable!("subcommand names are fixed"),
    };
    emit(name, args.format, &outcome)?;
    Ok(if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn emit(name: &str, format: Format, outcome: &Outcome) -> Result<(), CliError> {
    let mut parameters = serde_json::Map::new();
    for (k, v) in &outcome.parameters {
        parameters.insert((*k).to_string(), json!(v));
    }
    let envelope = json!({
        "command": name,
        "passed": outcome.passed,
        "parameters": parameters,
        "problems": outcome.problems,
        "report": outcome.report,
    });
    match format {
        Format::Text => print!("{}", render::render_text(&envelope)),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&envelope).expect("report serializes")
        ),
        Format::Dot => match &outcome.dot {
            Some(d) => print!("{d}"),
            None => {
                for p in &outcome.problems {
                    eprintln!("problem: {p}");
                }
            }
        },
    }
    Ok(())
}
