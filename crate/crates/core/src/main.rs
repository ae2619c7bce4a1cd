use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bicomplex_pt::config::{FileConfig, Format, RunConfig, SuiteKind};
use bicomplex_pt::models::{Family, Sign, SolutionType};
use bicomplex_pt::report::emit_report;
use bicomplex_pt::symmetry::SymmetryKind;
use bicomplex_pt::{run_suite, Error};

#[derive(Parser)]
#[command(name = "bicomplex-pt", version, about = "Numerical checks for bicomplex oscillator ground states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Ring, conjugation, modulus, inverse and matrix-representation properties.
    VerifyAlgebra,
    /// CR conditions, constraints, energies and ASE residuals for one model (or the built-in set).
    VerifyModel(ModelFlags),
    /// PT classification of one model (or the built-in set).
    Classify {
        #[arg(long)]
        op: Option<SymmetryKind>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Everything.
    Suite(ModelFlags),
}

#[derive(Args, Default)]
struct ModelFlags {
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long = "type")]
    solution_type: Option<SolutionType>,
    #[arg(long)]
    sign: Option<Sign>,
    #[arg(long)]
    beta3: Option<Sign>,
    #[arg(long)]
    beta4: Option<Sign>,
}

#[derive(Args)]
struct GlobalArgs {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    grid_range: Option<f64>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    fd_step: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi2: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Record per-check wall times (reports are then no longer reproducible byte for byte).
    #[arg(long, global = true)]
    timing: bool,
}

fn overrides(g: &GlobalArgs, m: &ModelFlags, op: Option<SymmetryKind>) -> FileConfig {
    FileConfig {
        seed: g.seed,
        samples: g.samples,
        grid_range: g.grid_range,
        grid_points: g.grid_points,
        fd_step: g.fd_step,
        xi1: g.xi1,
        xi2: g.xi2,
        out: g.out.clone(),
        format: g.format,
        workers: g.workers,
        timing: g.timing.then_some(true),
        op,
        family: m.family,
        a: m.a,
        b: m.b,
        solution_type: m.solution_type,
        sign: m.sign,
        beta3: m.beta3,
        beta4: m.beta4,
        ..FileConfig::default()
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let none = ModelFlags::default();
    let (suites, model, op): (&[SuiteKind], _, _) = match &cli.command {
        Command::VerifyAlgebra => (&SuiteKind::ALGEBRA, &none, None),
        Command::VerifyModel(m) => (&SuiteKind::MODEL, m, None),
        Command::Classify { op, model } => (&[SuiteKind::Classify], model, *op),
        Command::Suite(m) => (&SuiteKind::ALL, m, None),
    };
    let mut file = match &cli.global.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = overrides(&cli.global, model, op);
    if flags.model() != Default::default() {
        // Model flags on the command line replace any model list from the file.
        file.models = None;
    }
    let cfg = RunConfig::resolve(suites, file.merged(flags))?;
    let report = run_suite(&cfg)?;
    let bytes = emit_report(&report, cfg.format)?;
    match &cfg.out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
