mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ellipk_core::compare::{compare, comparison_row};
use ellipk_core::precision::{Arithmetic, Extended, Hardware, PrecisionContext};
use ellipk_core::special_fn::{ellipk, Method};
use ellipk_core::verify::{
    verify_all, verify_coefficients, verify_constants, verify_gamma_ratio_bound, verify_kershaw,
    verify_lemma, verify_non_dominance, verify_partial_sums, verify_sandwich, verify_shape,
    PointCertifier, SandwichOptions, VerificationReport, VerifyConfig,
};
use ellipk_core::{Error, Execution, GridSpec, Modulus};

use output::Format;

/// Digits used by escalation and by `verify` when `--digits` is absent.
const VERIFY_DIGITS: u32 = PrecisionContext::DEFAULT_DIGITS;

#[derive(Parser, Debug)]
#[command(
    name = "ellipk",
    version,
    about = "Complete elliptic integral K(r), its sharp elementary bounds, and their verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Significant digits for extended precision; omit for f64 (eval, bounds, compare).
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Process grid points and indices on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate K(r).
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        /// agm, series, quadrature or auto.
        #[arg(long, default_value = "auto")]
        method: Method,
        #[command(flatten)]
        common: Common,
    },
    /// Every bound at one modulus.
    Bounds {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Every bound over a grid, with a summary of which family is tighter where.
    Compare {
        /// start:stop:step, stop exclusive.
        #[arg(long, default_value = "0.01:1:0.01")]
        grid: GridSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check the claims behind the bounds.
    Verify {
        #[arg(value_enum)]
        target: Target,
        #[arg(long, default_value_t = 10_000)]
        max_n: u64,
        /// Grid for the sandwich or shape sweep.
        #[arg(long)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Lemma,
    Coefficients,
    Sandwich,
    Shape,
    Constants,
    All,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("output: {e}"))
    }
}

/// What a command produced: the main document, an optional side note, and
/// whether every claim held.
struct Rendered {
    body: String,
    summary: Option<String>,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Eval { common, .. }
        | Command::Bounds { common, .. }
        | Command::Compare { common, .. }
        | Command::Verify { common, .. } => common.clone(),
    };
    match run(cli.command).and_then(|r| emit(&common, r)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn emit(common: &Common, rendered: Rendered) -> Result<bool, Failure> {
    match &common.out {
        Some(path) => {
            fs::write(path, rendered.body.as_bytes())?;
            if let Some(s) = rendered.summary {
                print!("{s}");
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(rendered.body.as_bytes())?;
            if let Some(s) = rendered.summary {
                // Keep machine-readable stdout clean.
                if common.format == Format::Table {
                    stdout.write_all(s.as_bytes())?;
                } else {
                    eprint!("{s}");
                }
            }
        }
    }
    Ok(rendered.ok)
}

fn extended(digits: u32) -> Result<Extended, Failure> {
    Ok(Extended::new(digits)?)
}

fn run(command: Command) -> Result<Rendered, Failure> {
    match command {
        Command::Eval { r, method, common } => match common.digits {
            None => eval(&Hardware, r, method, &common),
            Some(d) => eval(&extended(d)?, r, method, &common),
        },
        Command::Bounds { r, common } => match common.digits {
            None => bounds(&Hardware, r, &common),
            Some(d) => bounds(&extended(d)?, r, &common),
        },
        Command::Compare { grid, common } => match common.digits {
            None => compare_grid(&Hardware, grid, &common),
            Some(d) => compare_grid(&extended(d)?, grid, &common),
        },
        Command::Verify {
            target,
            max_n,
            grid,
            common,
        } => verify(target, max_n, grid, &common),
    }
}

fn eval<A: Arithmetic>(ctx: &A, r: f64, method: Method, common: &Common) -> Result<Rendered, Failure> {
    let m = Modulus::new(r)?;
    let value = ellipk(ctx, m, method)?;
    Ok(Rendered {
        body: output::evaluation(ctx, m, &value, common.format),
        summary: None,
        ok: true,
    })
}

fn bounds<A: Arithmetic>(ctx: &A, r: f64, common: &Common) -> Result<Rendered, Failure> {
    let m = Modulus::interior(r)?;
    let certifier = PointCertifier::new(ctx, VERIFY_DIGITS)?;
    let row = comparison_row(&certifier, m)?;
    let ok = row.violations.is_empty() && !row.ar_not_dominated;
    Ok(Rendered {
        body: output::rows(ctx, std::slice::from_ref(&row), common.format),
        summary: None,
        ok,
    })
}

fn compare_grid<A: Arithmetic>(ctx: &A, grid: GridSpec, common: &Common) -> Result<Rendered, Failure> {
    let points = grid.points()?;
    let cmp = compare(ctx, &points, VERIFY_DIGITS, common.exec())?;
    let ok = cmp.violation_count() == 0;
    let (body, summary) = match common.format {
        Format::Json => (output::comparison_json(ctx, &cmp), None),
        _ => (
            output::rows(ctx, &cmp.rows, common.format),
            Some(output::summary_text(&cmp)),
        ),
    };
    Ok(Rendered { body, summary, ok })
}

fn verify(target: Target, max_n: u64, grid: Option<GridSpec>, common: &Common) -> Result<Rendered, Failure> {
    let ctx = extended(common.digits.unwrap_or(VERIFY_DIGITS))?;
    let exec = common.exec();
    let sandwich_opts = SandwichOptions {
        escalation_digits: VERIFY_DIGITS.max(ctx.digits()),
        exec,
        ..SandwichOptions::default()
    };
    let sandwich_grid = match grid {
        Some(g) => g.points()?,
        None => GridSpec::SANDWICH.points()?,
    };
    // The sweep runs in f64 with escalation unless digits were asked for.
    let in_hardware = common.digits.is_none();
    let reports: Vec<VerificationReport> = match target {
        Target::Constants => verify_constants(&ctx),
        Target::Lemma => vec![
            verify_lemma(&ctx, max_n, exec)?,
            verify_gamma_ratio_bound(&ctx, max_n, exec)?,
            verify_kershaw()?,
        ],
        Target::Coefficients => {
            let mut r = verify_coefficients(&ctx, max_n, exec)?;
            r.push(verify_partial_sums(&ctx, max_n, exec)?);
            r
        }
        Target::Sandwich => {
            let (mut r, nd) = if in_hardware {
                (
                    verify_sandwich(&Hardware, &sandwich_grid, &sandwich_opts)?,
                    verify_non_dominance(&Hardware, &sandwich_grid, exec)?,
                )
            } else {
                (
                    verify_sandwich(&ctx, &sandwich_grid, &sandwich_opts)?,
                    verify_non_dominance(&ctx, &sandwich_grid, exec)?,
                )
            };
            r.push(nd.report);
            r
        }
        Target::Shape => {
            let shape_grid = match grid {
                Some(g) => g.points()?,
                None => GridSpec::SHAPE.points()?,
            };
            verify_shape(&ctx, &shape_grid, exec)?
        }
        Target::All => {
            let cfg = VerifyConfig {
                n_max: max_n,
                sandwich_grid,
                sandwich: sandwich_opts,
                sandwich_in_hardware: in_hardware,
                exec,
                ..VerifyConfig::default()
            };
            verify_all(&ctx, &cfg)?
        }
    };
    let ok = reports.iter().all(|r| r.passed);
    Ok(Rendered {
        body: output::reports(&reports, common.format),
        summary: None,
        ok,
    })
}
