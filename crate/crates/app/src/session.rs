//! Loading and updating a run directory: the state shared by the CLI
//! subcommands and the server.

use std::path::Path;

use solspace::baseline::{default_weights, evaluate_baseline, optimize_baseline, BaselineError};
use solspace::boxsolver::SolveError;
use solspace::run::{BoxRecord, RunDir, RunError, BASELINE_FILE, BOX_FILE, PROBLEM_FILE, TRACE_FILE};
use solspace::sections::SectionError;
use solspace::{
    derive_requirements, mu, restrict_and_resolve, solve_box, validate_box, BaselineResult, DesignBox,
    DesignPoint, Problem, ProblemError, ProblemFile, SolverParams, SolverTrace,
};
use thiserror::Error;

/// Samples used for the purity figure stored in `box.json`.
pub const BOX_PURITY_SAMPLES: usize = 2000;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error("no problem given: pass --problem or use a run directory containing {PROBLEM_FILE}")]
    NoProblem,
    #[error("{BASELINE_FILE} absent and the problem has no literal x_baseline; run `baseline` first")]
    NoBaseline,
}

/// Reads the problem from `path`, or from the run directory when `path` is
/// `None`.
pub fn load_problem(dir: &RunDir, path: Option<&Path>) -> Result<Problem, SessionError> {
    match path {
        Some(p) => Ok(Problem::load(p)?),
        None if dir.exists(PROBLEM_FILE) => {
            let file: ProblemFile = dir.read_json(PROBLEM_FILE)?;
            Ok(Problem::from_file(file)?)
        }
        None => Err(SessionError::NoProblem),
    }
}

/// Literal baseline when the problem carries one, otherwise the evolution
/// strategy with `budget` evaluations.
pub fn compute_baseline(problem: &Problem, budget: usize, seed: u64) -> Result<BaselineResult, SessionError> {
    let weights = default_weights(problem);
    let result = match &problem.file().x_baseline {
        Some(x) => evaluate_baseline(problem, DesignPoint(x.clone()), &weights)?,
        None => optimize_baseline(problem, &weights, budget, seed)?,
    };
    Ok(result)
}

/// Baseline from the run directory, or the problem's literal one.
pub fn baseline_for(dir: &RunDir, problem: &Problem) -> Result<BaselineResult, SessionError> {
    if dir.exists(BASELINE_FILE) {
        return Ok(dir.read_json(BASELINE_FILE)?);
    }
    match &problem.file().x_baseline {
        Some(_) => compute_baseline(problem, 0, 0),
        None => Err(SessionError::NoBaseline),
    }
}

/// The problem the box is solved against: its declared requirements, or the
/// ones derived from the baseline when it declares none.
pub fn constrained(problem: &Problem, baseline: &BaselineResult) -> Result<Problem, SessionError> {
    if problem.requirements().is_empty() {
        Ok(problem.with_requirements(derive_requirements(baseline))?)
    } else {
        Ok(problem.clone())
    }
}

pub fn box_record(problem: &Problem, b: DesignBox, params: SolverParams) -> Result<BoxRecord, SessionError> {
    let purity = validate_box(problem, &b, BOX_PURITY_SAMPLES, params.seed)?.purity;
    Ok(BoxRecord {
        mu: mu(&b, problem),
        intervals: b.intervals,
        purity,
        seed: params.seed,
        params,
    })
}

pub fn solve(
    problem: &Problem,
    baseline: &BaselineResult,
    params: SolverParams,
) -> Result<(BoxRecord, SolverTrace), SessionError> {
    let (b, trace) = solve_box(problem, &baseline.x_baseline, &params)?;
    Ok((box_record(problem, b, params)?, trace))
}

pub fn tradeoff(
    problem: &Problem,
    current: &BoxRecord,
    dv: &str,
    interval: (f64, f64),
    seed: u64,
) -> Result<(BoxRecord, SolverTrace), SessionError> {
    let params = SolverParams {
        seed,
        ..current.params
    };
    let (b, trace) = restrict_and_resolve(problem, &current.design_box(), dv, interval, &params)?;
    Ok((box_record(problem, b, params)?, trace))
}

/// Writes `box.json` and `trace.json`, then refreshes the manifest.
pub fn store_box(dir: &RunDir, record: &BoxRecord, trace: &SolverTrace) -> Result<(), SessionError> {
    dir.write_json(BOX_FILE, record)?;
    dir.write_json(TRACE_FILE, trace)?;
    dir.write_manifest()?;
    Ok(())
}

/// Everything a solved run directory holds, with the constrained problem.
#[derive(Debug, Clone)]
pub struct Session {
    pub problem: Problem,
    pub baseline: BaselineResult,
    pub box_record: BoxRecord,
    pub trace: SolverTrace,
}

impl Session {
    pub fn open(dir: &RunDir, problem_path: Option<&Path>) -> Result<Self, SessionError> {
        let problem = load_problem(dir, problem_path)?;
        let baseline = baseline_for(dir, &problem)?;
        let problem = constrained(&problem, &baseline)?;
        let box_record: BoxRecord = dir.read_json(BOX_FILE)?;
        let trace = dir.read_json(TRACE_FILE)?;
        box_record.design_box().validate(&problem)?;
        Ok(Self {
            problem,
            baseline,
            box_record,
            trace,
        })
    }
}
