//! `solspace` subcommands.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for domain failures such
//! as an infeasible seed or a non-nested trade-off interval.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use solspace::run::{RunDir, BASELINE_FILE, PROBLEM_FILE};
use solspace::{make_section, validate_box, SolverParams, Span};

use crate::session::{self, Session, SessionError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

const AFTER_HELP: &str = "Problem files use schema version 1. A run directory holds problem.json,
baseline.json, box.json, trace.json, sections/ and manifest.json; later
subcommands read what earlier ones wrote.";

#[derive(Debug, Parser)]
#[command(name = "solspace", version, about = "Solution-space co-design workflow", after_help = AFTER_HELP)]
pub struct Cli {
    /// Problem file (JSON). Defaults to problem.json in the run directory.
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// Run directory. Defaults to runs/<unix-time>.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpanArg {
    Box,
    DesignSpace,
}

impl From<SpanArg> for Span {
    fn from(s: SpanArg) -> Self {
        match s {
            SpanArg::Box => Span::Box,
            SpanArg::DesignSpace => Span::DesignSpace,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the baseline design and write baseline.json.
    Baseline {
        /// Evaluation budget of the evolution strategy.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
    },
    /// Compute the solution box; writes box.json and trace.json.
    Solve {
        /// Samples per solver iteration.
        #[arg(long, default_value_t = SolverParams::default().n_samples)]
        samples: usize,
    },
    /// Export 2D design sections of the box.
    Sections {
        /// Variable pairs as indices or names: i,j[,k,l...]
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<String>,
        /// Points per section.
        #[arg(long, default_value_t = solspace::sections::DEFAULT_SECTION_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SpanArg::DesignSpace)]
        span: SpanArg,
    },
    /// Estimate the purity of the box with fresh samples.
    Validate {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Narrow one variable and re-solve the others.
    Tradeoff {
        #[arg(long)]
        dv: String,
        /// New interval as lower,upper
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: (f64, f64),
    },
    /// Serve the run over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lower,upper, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("not a finite number: {t:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("server: {0}")]
    Server(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Session(SessionError::NoProblem) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn default_out() -> PathBuf {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    PathBuf::from("runs").join(secs.to_string())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let dir = RunDir::new(cli.out.clone().unwrap_or_else(default_out));
    let problem_path = cli.problem.as_deref();
    match cli.command {
        Command::Baseline { budget } => {
            let problem = session::load_problem(&dir, problem_path)?;
            let result = session::compute_baseline(&problem, budget, cli.seed)?;
            dir.write_json(PROBLEM_FILE, problem.file()).map_err(SessionError::from)?;
            dir.write_json(BASELINE_FILE, &result).map_err(SessionError::from)?;
            dir.write_manifest().map_err(SessionError::from)?;
            println!("baseline written to {}", dir.path(BASELINE_FILE).display());
            for (q, v) in &result.qois {
                println!("  {q} = {v}");
            }
            println!("  objective {} after {} evaluations", result.objective, result.evaluations_used);
        }
        Command::Solve { samples } => {
            let problem = session::load_problem(&dir, problem_path)?;
            let baseline = session::baseline_for(&dir, &problem)?;
            let constrained = session::constrained(&problem, &baseline)?;
            let params = SolverParams {
                n_samples: samples,
                ..SolverParams::with_seed(cli.seed)
            };
            let (record, trace) = session::solve(&constrained, &baseline, params)?;
            dir.write_json(PROBLEM_FILE, problem.file()).map_err(SessionError::from)?;
            if !dir.exists(BASELINE_FILE) {
                dir.write_json(BASELINE_FILE, &baseline).map_err(SessionError::from)?;
            }
            session::store_box(&dir, &record, &trace)?;
            println!("mu = {:e}, purity = {} ({} iterations)", record.mu, record.purity, trace.records.len());
            print_intervals(&constrained, &record.intervals);
        }
        Command::Sections { dims, samples, span } => {
            let s = Session::open(&dir, problem_path)?;
            let pairs = parse_pairs(&s.problem, &dims)?;
            let b = s.box_record.design_box();
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let section = make_section(&s.problem, &b, (i, j), samples, cli.seed + k as u64, span.into())
                    .map_err(SessionError::from)?;
                dir.write_section(&section).map_err(SessionError::from)?;
                println!("section ({i}, {j}): {} points", section.points.len());
            }
            dir.write_manifest().map_err(SessionError::from)?;
        }
        Command::Validate { n } => {
            let s = Session::open(&dir, problem_path)?;
            let p = validate_box(&s.problem, &s.box_record.design_box(), n, cli.seed)
                .map_err(SessionError::from)?;
            println!("purity = {} (n = {}, seed = {})", p.purity, p.samples, cli.seed);
            if let Some(w) = p.warning {
                eprintln!("warning: {w}");
            }
        }
        Command::Tradeoff { dv, interval } => {
            let s = Session::open(&dir, problem_path)?;
            let (record, trace) = session::tradeoff(&s.problem, &s.box_record, &dv, interval, cli.seed)?;
            session::store_box(&dir, &record, &trace)?;
            println!("mu = {:e}, purity = {}", record.mu, record.purity);
            print_intervals(&s.problem, &record.intervals);
        }
        Command::Serve { addr } => {
            let s = Session::open(&dir, problem_path)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::server::serve(&addr, s, dir))?;
        }
    }
    Ok(())
}

fn print_intervals(problem: &solspace::Problem, intervals: &[(f64, f64)]) {
    for (v, (lo, hi)) in problem.variables().iter().zip(intervals) {
        println!("  {:<10} [{lo}, {hi}] {}", v.name, v.unit);
    }
}

fn parse_pairs(problem: &solspace::Problem, dims: &[String]) -> Result<Vec<(usize, usize)>, CliError> {
    if dims.is_empty() || !dims.len().is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "--dims needs an even number of entries, got {}",
            dims.len()
        )));
    }
    let index = |d: &str| {
        d.trim()
            .parse::<usize>()
            .ok()
            .filter(|&i| i < problem.dim())
            .or_else(|| problem.variable_index(d.trim()))
            .ok_or_else(|| CliError::Usage(format!("unknown design variable {d:?}")))
    };
    dims.chunks(2)
        .map(|c| {
            let (i, j) = (index(&c[0])?, index(&c[1])?);
            if i == j {
                return Err(CliError::Usage(format!("section axes must differ, got {i},{j}")));
            }
            Ok((i, j))
        })
        .collect()
}
