//! Batch runner behind the `fama` binary.

mod config;
mod output;
mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::*;
pub use output::{comparison_table, csv, json, write_atomic, Format, CSV_HEADER};
pub use sweep::{compare, evaluate_cell, run_sweep, Comparison, Row, SweepResult};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fama", version, about = "FAMA outage, multiplexing-gain and energy-efficiency sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every point of the sweep in a scenario file.
    Sweep(RunArgs),
    /// Check MC estimates against the exact quadrature (|MC - EXACT| <= 3 ci).
    Compare(RunArgs),
    /// Evaluate the base configuration only, ignoring any sweep axis.
    Eval(RunArgs),
    /// Print the spatial correlation parameter for a fluid-antenna size.
    Mu {
        /// Size in wavelengths.
        #[arg(long = "w")]
        w: f64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file.
    config: PathBuf,
    /// Overrides `trials` from the scenario.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides `seed` from the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for MC and quadrature.
    #[arg(long, env = "FAMA_WORKERS")]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the `seconds` column (makes the output run-dependent).
    #[arg(long)]
    timings: bool,
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

fn load(args: &RunArgs) -> Result<Scenario> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut sc = parse_scenario(&text)?;
    if let Some(t) = args.trials {
        sc.trials = t;
    }
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    if sc.trials < crate::montecarlo::MIN_TRIALS {
        return Err(Error::InvalidConfig(format!("trials must be at least {}", crate::montecarlo::MIN_TRIALS)));
    }
    Ok(sc)
}

fn emit(args: &RunArgs, text: &str) -> Result<()> {
    match &args.out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn table(args: &RunArgs, result: &SweepResult, cmp: Option<&[Comparison]>) -> String {
    match args.format {
        Format::Csv => csv(result, args.timings),
        Format::Json => json(result, cmp, args.timings),
    }
}

// Numerical failures outrank input-related ones (such as unsupported
// method requests) when picking the exit status of a finished run.
fn row_status(result: &SweepResult) -> i32 {
    let mut code = EXIT_OK;
    for r in result.failures() {
        code = code.max(if r.numerical_failure { EXIT_NUMERICAL } else { EXIT_VALIDATION });
    }
    code
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Mu { w } => {
            let cfg = SystemConfig { fa_size: w, ..SystemConfig::baseline() };
            cfg.validate()?;
            println!("{}", cfg.mu()?);
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => with_workers(&args, || {
            let sc = load(&args)?;
            let result = run_sweep(&sc)?;
            emit(&args, &table(&args, &result, None))?;
            Ok(row_status(&result))
        }),
        Command::Eval(args) => with_workers(&args, || {
            let mut sc = load(&args)?;
            sc.axis = None;
            sc.values.clear();
            let result = run_sweep(&sc)?;
            emit(&args, &table(&args, &result, None))?;
            Ok(row_status(&result))
        }),
        Command::Compare(args) => with_workers(&args, || {
            let sc = load(&args)?;
            let (result, cmp) = compare(&sc)?;
            let text = match args.format {
                Format::Csv => comparison_table(&cmp),
                Format::Json => json(&result, Some(&cmp), args.timings),
            };
            emit(&args, &text)?;
            let mut code = EXIT_OK;
            for c in cmp.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}={} {}: mc {} exact {} diff {:.3e} > {:.3e}", sc.axis.map(|a| a.name()).unwrap_or("cell"), c.axis_value, c.metric, c.mc, c.exact, c.diff, c.limit);
                code = EXIT_VALIDATION;
            }
            Ok(code.max(row_status(&result)))
        }),
    }
}

fn with_workers(args: &RunArgs, f: impl FnOnce() -> Result<i32> + Send) -> Result<i32> {
    match args.workers {
        Some(0) => Err(Error::InvalidConfig("workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {n} workers: {e}")))?
            .install(f),
        None => f(),
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
