//! `qma`: symbolic reduction, manufactured problems, continuity solves and
//! estimate audits for the reduced quaternionic Monge-Ampere equations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qma::config::{parse_config, RunConfig};
use qma::equations::{ReducedEquation, Variant};
use qma::error::Error;
use qma::fields::io::{load_field, save_field, write_atomic};
use qma::fields::{resample, PeriodicGrid, ScalarField};
use qma::lie_hkt::{reduce_invariant, GroupId, Invariance};
use qma::solver::{solve, SolveOptions};
use qma::verify::{audit, manufacture, normalization_check, seed_field, SeedSpec};

const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 1;
const EXIT_NORMALIZATION: u8 = 2;
const EXIT_STALLED: u8 = 3;
const EXIT_ELLIPTICITY: u8 = 4;

/// Tolerance on `integral (e^F - 1)` used by `check-normalization`.
const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "qma", version, about = "Reduced quaternionic Monge-Ampere equations on tori")]
struct Cli {
    /// Print per-step diagnostics to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupArg {
    N1,
    N2,
    N3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InvarianceArg {
    T4,
    T3,
    T2,
    S1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EquationArg {
    T4,
    T5,
    T6,
    T7,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Emit {
    #[default]
    Latex,
    Json,
}

impl From<EquationArg> for Variant {
    fn from(e: EquationArg) -> Self {
        match e {
            EquationArg::T4 => Variant::T4,
            EquationArg::T5 => Variant::T5,
            EquationArg::T6 => Variant::T6,
            EquationArg::T7 => Variant::T7,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a reduced equation symbolically and print it.
    Reduce {
        #[arg(long, value_enum)]
        group: GroupArg,
        #[arg(long, value_enum)]
        invariance: InvarianceArg,
        #[arg(long, value_enum, default_value_t = Emit::Latex)]
        emit: Emit,
    },
    /// Build a problem with known solution from a seed potential.
    Manufacture {
        #[arg(long, value_enum)]
        equation: EquationArg,
        /// e.g. `0.02*cos(1,0,0,0,0)*cos(0,0,0,0,1)` or `random(3,0.05,7)`.
        #[arg(long)]
        seed_spec: String,
        /// Comma-separated grid shape (default: 16 points per axis for t4/t5, 12 for t6, 8 for t7).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        out_phi: PathBuf,
        #[arg(long)]
        out_f: PathBuf,
    },
    /// Solve for a potential by the continuity method.
    Solve {
        /// Configuration file; command-line flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        equation: Option<EquationArg>,
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Resample F spectrally onto this grid before solving.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        /// Residual sup-norm target.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Report ellipticity and estimate margins of a potential.
    Audit {
        #[arg(long, value_enum)]
        equation: EquationArg,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print `integral (e^F - 1)`; exits with 2 if it is not zero within 1e-8.
    CheckNormalization {
        #[arg(long)]
        f: PathBuf,
    },
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NormalizationViolation { .. } => EXIT_NORMALIZATION,
            Error::ContinuationStalled { .. } => EXIT_STALLED,
            Error::EllipticityLoss { .. } => EXIT_ELLIPTICITY,
            Error::Parse { .. } | Error::Validation { .. } | Error::SeedSpec(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn default_grid(variant: Variant) -> Vec<usize> {
    let n = match variant {
        Variant::T4 | Variant::T5 => 16,
        Variant::T6 => 12,
        Variant::T7 => 8,
    };
    vec![n; variant.base_dim()]
}

fn make_grid(variant: Variant, shape: Vec<usize>) -> Result<PeriodicGrid, Failure> {
    if shape.len() != variant.base_dim() {
        return Err(usage(format!(
            "--grid has {} axes but {variant} needs {}",
            shape.len(),
            variant.base_dim()
        )));
    }
    PeriodicGrid::new(shape).map_err(|e| usage(e.to_string()))
}

fn run_reduce(group: GroupArg, invariance: InvarianceArg, emit: Emit) -> Result<(), Failure> {
    let group = match group {
        GroupArg::N1 => GroupId::N1,
        GroupArg::N2 => GroupId::N2,
        GroupArg::N3 => GroupId::N3,
    };
    let invariance = match invariance {
        InvarianceArg::T4 => Invariance::T4,
        InvarianceArg::T3 => Invariance::T3,
        InvarianceArg::T2 => Invariance::T2,
        InvarianceArg::S1 => Invariance::S1,
    };
    let reduced = reduce_invariant(group, invariance).map_err(|e| match e {
        Error::UnsupportedCombination { .. } => usage(e.to_string()),
        e => e.into(),
    })?;
    match emit {
        Emit::Latex => println!("{}", reduced.to_latex()),
        Emit::Json => println!("{}", reduced.to_json()),
    }
    Ok(())
}

fn run_manufacture(
    equation: EquationArg,
    seed_spec: &str,
    grid: Option<Vec<usize>>,
    out_phi: &Path,
    out_f: &Path,
) -> Result<(), Failure> {
    let variant = Variant::from(equation);
    let grid = make_grid(variant, grid.unwrap_or_else(|| default_grid(variant)))?;
    let spec: SeedSpec = seed_spec.parse()?;
    let eq = ReducedEquation::new(variant);
    let problem = manufacture(&eq, &seed_field(&spec, &grid)?)?;
    save_field(&problem.phi_star, out_phi)?;
    save_field(&problem.f, out_f)?;
    println!(
        "manufactured {variant} on {:?}: amplitude scale {:e} ({} halvings), positivity margin {:e}, normalization {:e}",
        grid.shape(),
        problem.amplitude_scale,
        problem.halvings,
        problem.positivity_margin,
        normalization_check(&problem.f)?
    );
    Ok(())
}

struct SolveArgs {
    config: Option<PathBuf>,
    equation: Option<EquationArg>,
    f: Option<PathBuf>,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    grid: Option<Vec<usize>>,
    tol: Option<f64>,
}

fn resolve_solve(args: SolveArgs, verbose: u8) -> Result<RunConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            let mut text = text;
            // an equation given on the command line must be visible to validation
            if let Some(eq) = args.equation {
                text.push_str(&format!("\nequation = {}\n", Variant::from(eq)));
            }
            parse_config(&text)?
        }
        None => {
            let equation = args.equation.ok_or_else(|| usage("--equation is required"))?;
            RunConfig {
                equation: equation.into(),
                grid: None,
                solver: SolveOptions::default(),
                input: None,
                output: None,
                trace: None,
                verbosity: 0,
            }
        }
    };
    if let Some(eq) = args.equation {
        config.equation = eq.into();
    }
    if let Some(grid) = args.grid {
        config.grid = Some(grid);
    }
    if let Some(tol) = args.tol {
        config.solver.newton_tol = tol;
    }
    config.input = args.f.or(config.input);
    config.output = args.out.or(config.output);
    config.trace = args.trace.or(config.trace);
    config.verbosity = config.verbosity.max(verbose);
    config.solver.validate()?;
    if config.input.is_none() {
        return Err(usage("--f (or `input` in the config) is required"));
    }
    Ok(config)
}

fn run_solve(args: SolveArgs, verbose: u8) -> Result<(), Failure> {
    let config = resolve_solve(args, verbose)?;
    let eq = ReducedEquation::new(config.equation);
    let mut f = load_field(config.input.as_ref().expect("checked"))?;
    if let Some(shape) = &config.grid {
        let grid = make_grid(config.equation, shape.clone())?;
        f = resample(&f, &grid)?;
    }
    let result = solve(&eq, &f, &config.solver)?;
    if config.verbosity > 0 {
        eprint!("{}", result.trace.to_csv());
    }
    if let Some(path) = &config.trace {
        write_atomic(path, result.trace.to_csv().as_bytes())?;
    }
    if let Some(failure) = result.failure {
        return Err(failure.into());
    }
    if let Some(path) = &config.output {
        save_field(&result.phi, path)?;
    }
    let last = result.trace.entries.last().expect("converged trace is non-empty");
    println!(
        "converged {} on {:?}: {} continuation steps, residual {:e}, lambda_min {:e}",
        config.equation,
        f.grid().shape(),
        result.trace.entries.len(),
        last.residual_sup,
        last.lambda_min
    );
    Ok(())
}

fn run_audit(equation: EquationArg, phi: &Path, f: &Path, out: &Path) -> Result<(), Failure> {
    let eq = ReducedEquation::new(equation.into());
    let phi: ScalarField = load_field(phi)?;
    let f = load_field(f)?;
    let report = audit(&eq, &phi, &f)?;
    let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    json.push('\n');
    write_atomic(out, json.as_bytes())?;
    println!(
        "audit {}: lambda_min {:e}, min A {:e}, min B {:e}, harnack margin {:e}, strong margin {}",
        eq.variant,
        report.ellipticity.lambda_min,
        report.a.min,
        report.b.min,
        report.estimates.harnack_margin,
        report
            .ellipticity
            .strong_margin
            .map_or_else(|| "n/a".to_string(), |m| format!("{m:e}"))
    );
    Ok(())
}

fn run_check_normalization(f: &Path) -> Result<(), Failure> {
    let value = normalization_check(&load_field(f)?)?;
    println!("{value:e}");
    if value.abs() > NORMALIZATION_TOL {
        return Err(Failure {
            code: EXIT_NORMALIZATION,
            message: format!("integral of exp(F) - 1 is {value:e}, not zero within {NORMALIZATION_TOL:e}"),
        });
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QMA_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| usage(format!("QMA_THREADS must be a non-negative integer, got `{value}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure {
                code: EXIT_FAILURE,
                message: e.to_string(),
            })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Reduce {
            group,
            invariance,
            emit,
        } => run_reduce(group, invariance, emit),
        Command::Manufacture {
            equation,
            seed_spec,
            grid,
            out_phi,
            out_f,
        } => run_manufacture(equation, &seed_spec, grid, &out_phi, &out_f),
        Command::Solve {
            config,
            equation,
            f,
            out,
            trace,
            grid,
            tol,
        } => run_solve(
            SolveArgs {
                config,
                equation,
                f,
                out,
                trace,
                grid,
                tol,
            },
            cli.verbose,
        ),
        Command::Audit { equation, phi, f, out } => run_audit(equation, &phi, &f, &out),
        Command::CheckNormalization { f } => run_check_normalization(&f),
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qma: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
