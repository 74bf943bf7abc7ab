//! Command-line front end: solve a problem, run a convergence study, list
//! the built-in examples.
//!
//! Exit codes: 0 success, 2 usage errors (bad flags, bad problem files, bad
//! ladders), 1 numerical failures (singular systems, expression domain
//! errors at evaluation time).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::assembly::assemble;
use crate::driver::{convergence_study, solution_json, solution_markdown, system_csv, SolveError};
use crate::problem::{example_expressions, example_problem, load_problem, Bvp, ProblemError};
use crate::spline::{knot_table_csv, SplineSolution};

#[derive(Debug, Parser)]
#[command(
    name = "quintic-bvp",
    version,
    about = "Quintic spline solver for fourth-order linear two-point boundary value problems y'''' + f(x) y = g(x) with clamped ends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve on a k-subinterval mesh and emit the knot table
    #[command(group(
        ArgGroup::new("source").required(true).multiple(false).args(["example", "problem"])
    ))]
    Solve {
        /// Built-in example id (1, 2, or 3)
        #[arg(long, value_name = "ID")]
        example: Option<u32>,
        /// JSON problem file (see the README for the format)
        #[arg(long, value_name = "PATH")]
        problem: Option<PathBuf>,
        /// Number of mesh subintervals (at least 8)
        #[arg(long, value_name = "INT")]
        k: usize,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the output here instead of standard output
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also emit the assembled matrix and right-hand side as CSV
        /// (to <out>.system.csv, or to standard output after the table)
        #[arg(long)]
        dump_system: bool,
        /// Print consistency-identity residuals and junction data to stderr
        #[arg(long)]
        diagnostics: bool,
    },
    /// Solve on a ladder of meshes and report errors and observed orders
    #[command(group(
        ArgGroup::new("source").required(true).multiple(false).args(["example", "problem"])
    ))]
    Convergence {
        /// Built-in example id (1, 2, or 3)
        #[arg(long, value_name = "ID")]
        example: Option<u32>,
        /// JSON problem file; must carry a `reference` entry
        #[arg(long, value_name = "PATH")]
        problem: Option<PathBuf>,
        /// Comma-separated mesh ladder, e.g. 8,16,32,64
        #[arg(long, value_name = "INTS", value_delimiter = ',', required = true)]
        ks: Vec<usize>,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the output here instead of standard output
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Print per-rung residual summaries to stderr
        #[arg(long)]
        diagnostics: bool,
    },
    /// List the built-in example problems
    Examples,
}

#[derive(Debug, thiserror::Error)]
enum CliFailure {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl From<ProblemError> for CliFailure {
    fn from(e: ProblemError) -> Self {
        CliFailure::Solve(SolveError::Problem(e))
    }
}

impl CliFailure {
    fn exit_code(&self) -> i32 {
        match self {
            CliFailure::Solve(
                SolveError::Problem(_)
                | SolveError::BadLadder { .. }
                | SolveError::MissingReference,
            ) => 2,
            CliFailure::Solve(_) => 1,
            CliFailure::Write { .. } => 2,
        }
    }
}

/// Parse and execute; returns the process exit code. All output strings are
/// fully built before anything is written, so a failure never leaves a
/// partial output file behind.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            eprintln!("{line}");
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_source(example: Option<u32>, problem: Option<&Path>) -> Result<Bvp<f64>, CliFailure> {
    match (example, problem) {
        (Some(id), None) => Ok(example_problem(id)?),
        (None, Some(path)) => Ok(load_problem(path)?),
        _ => unreachable!("the argument group enforces exactly one source"),
    }
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), CliFailure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliFailure::Write { path: path.to_owned(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Solve { example, problem, k, format, out, dump_system, diagnostics } => {
            let p = load_source(example, problem.as_deref())?;
            let mesh = p.mesh(k).map_err(SolveError::Problem)?;
            let sys = assemble(&p, &mesh).map_err(SolveError::Assembly)?;
            let y_interior =
                sys.matrix.lu().and_then(|lu| lu.solve(&sys.rhs)).map_err(SolveError::Linear)?;
            let s =
                SplineSolution::reconstruct(&p, &mesh, &y_interior).map_err(SolveError::Knot)?;

            let table = match format {
                Format::Csv => knot_table_csv(&s, p.reference()).map_err(SolveError::Knot)?,
                Format::Markdown => solution_markdown(&p, &s).map_err(SolveError::Knot)?,
                Format::Json => solution_json(&p, &s).map_err(SolveError::Knot)?,
            };
            let system = dump_system.then(|| system_csv(&sys));

            if diagnostics {
                eprint!("{}", s.consistency_residuals());
                let j = s.junction_jumps();
                eprintln!(
                    "junction max jumps, orders 0-3: {:.3e} {:.3e} {:.3e} {:.3e}",
                    j.max_jump[0], j.max_jump[1], j.max_jump[2], j.max_jump[3]
                );
                eprintln!("right-end slope defect: {:.3e}", s.slope_end_defect());
            }

            write_or_print(&table, out.as_deref())?;
            if let Some(system) = system {
                match &out {
                    Some(path) => {
                        write_or_print(&system, Some(&path.with_extension("system.csv")))?
                    }
                    None => print!("{system}"),
                }
            }
            Ok(())
        }
        Command::Convergence { example, problem, ks, format, out, diagnostics } => {
            let p = load_source(example, problem.as_deref())?;
            let report = convergence_study(&p, &ks)?;
            let text = match format {
                Format::Csv => report.to_csv(),
                Format::Markdown => report.to_markdown(),
                Format::Json => report.to_json(),
            };

            if diagnostics {
                for &k in &ks {
                    let s = crate::driver::solve_bvp(&p, k)?;
                    let rep = s.consistency_residuals();
                    let worst = rep.residuals.iter().map(|r| r.normalized).fold(0.0f64, f64::max);
                    eprintln!(
                        "k = {k}: worst normalized residual {worst:.3e}, right-end slope defect {:.3e}",
                        s.slope_end_defect()
                    );
                }
            }

            write_or_print(&text, out.as_deref())
        }
        Command::Examples => {
            let mut text = String::new();
            for id in 1..=3u32 {
                let p = example_problem::<f64>(id).expect("built-in id");
                let (f, g) = example_expressions(id).expect("built-in id");
                text.push_str(&format!(
                    "{id}: y'''' + ({f}) y = {g}  on [{}, {}],  y({}) = {}, y({}) = {}, y'({}) = {}, y'({}) = {}\n",
                    p.a, p.b, p.a, p.alpha0, p.b, p.alpha1, p.a, p.beta0, p.b, p.beta1
                ));
            }
            print!("{text}");
            Ok(())
        }
    }
}
