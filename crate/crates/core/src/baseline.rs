//! Point-based baseline co-design and requirement derivation.
//!
//! The baseline is found with a small elitist evolution strategy in
//! normalized design coordinates: each generation samples a Gaussian
//! population around the incumbent, keeps the best design, and shrinks the
//! step after a run of generations without improvement.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adg::{DesignPoint, QoiValues, Requirement};
use crate::problem::{Problem, ProblemError};

/// Finite penalty added per violated feasibility condition.
pub const INFEASIBLE_PENALTY: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub x_baseline: DesignPoint,
    pub qois: BTreeMap<String, f64>,
    pub objective: f64,
    pub evaluations_used: usize,
    /// Optimizer seed; `None` for a literal baseline.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    pub population: usize,
    /// Step multiplier applied after `patience` stagnant generations.
    pub shrink: f64,
    pub patience: usize,
    /// Initial step, as a fraction of each design-space width.
    pub initial_step: f64,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            population: 16,
            shrink: 0.7,
            patience: 5,
            initial_step: 0.3,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("budget {budget} is smaller than the population size {population}")]
    BudgetTooSmall { budget: usize, population: usize },
    #[error("no feasible design found in {evaluations} evaluations (best objective {objective})")]
    NoFeasible {
        best: DesignPoint,
        objective: f64,
        evaluations: usize,
    },
    #[error("baseline design is infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Weighted sum of QoIs plus [`INFEASIBLE_PENALTY`] for an undefined QoI set
/// and again for a timed-out simulation.
pub fn scalarize(qois: &QoiValues, weights: &BTreeMap<String, f64>) -> f64 {
    let mut total: f64 = weights
        .iter()
        .filter_map(|(q, w)| qois.get(q).map(|v| w * v))
        .sum();
    if qois.infeasible.is_some() || qois.values.values().any(Option::is_none) {
        total += INFEASIBLE_PENALTY;
    }
    if qois.timed_out {
        total += INFEASIBLE_PENALTY;
    }
    total
}

/// Weights from the problem file, or unit weight on every QoI.
pub fn default_weights(problem: &Problem) -> BTreeMap<String, f64> {
    problem
        .file()
        .weights
        .clone()
        .unwrap_or_else(|| problem.qoi_names().into_iter().map(|q| (q, 1.0)).collect())
}

#[derive(Debug, Clone)]
struct Candidate {
    x: DesignPoint,
    qois: QoiValues,
    objective: f64,
}

impl Candidate {
    fn feasible(&self) -> bool {
        self.qois.is_feasible()
    }

    fn better_than(&self, other: &Candidate) -> bool {
        match (self.feasible(), other.feasible()) {
            (true, false) => true,
            (false, true) => false,
            _ => self.objective < other.objective,
        }
    }
}

/// Runs the evolution strategy and returns the best design found.
pub fn optimize_baseline(
    problem: &Problem,
    weights: &BTreeMap<String, f64>,
    budget: usize,
    seed: u64,
) -> Result<BaselineResult, BaselineError> {
    optimize_baseline_traced(problem, weights, budget, seed, EsConfig::default()).map(|(r, _)| r)
}

/// As [`optimize_baseline`], also returning the incumbent objective after
/// every generation.
pub fn optimize_baseline_traced(
    problem: &Problem,
    weights: &BTreeMap<String, f64>,
    budget: usize,
    seed: u64,
    config: EsConfig,
) -> Result<(BaselineResult, Vec<f64>), BaselineError> {
    if budget < config.population || config.population == 0 {
        return Err(BaselineError::BudgetTooSmall {
            budget,
            population: config.population,
        });
    }
    let vars = problem.variables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean: Vec<f64> = (0..vars.len()).map(|_| rng.random::<f64>()).collect();
    let mut step = config.initial_step;
    let mut stagnant = 0usize;
    let mut incumbent: Option<Candidate> = None;
    let mut evaluations = 0usize;
    let mut history = Vec::new();

    while evaluations + config.population <= budget {
        let population: Vec<DesignPoint> = (0..config.population)
            .map(|_| {
                DesignPoint(
                    vars.iter()
                        .zip(&mean)
                        .map(|(v, &m)| {
                            let z: f64 = rng.sample(StandardNormal);
                            let u = (m + step * z).clamp(0.0, 1.0);
                            v.lower + u * v.width()
                        })
                        .collect(),
                )
            })
            .collect();
        let qois = problem.evaluate_batch(&population)?;
        evaluations += population.len();

        let best = population
            .into_iter()
            .zip(qois)
            .map(|(x, qois)| {
                let objective = scalarize(&qois, weights);
                Candidate { x, qois, objective }
            })
            .reduce(|a, b| if b.better_than(&a) { b } else { a })
            .expect("population is non-empty");

        let improved = incumbent.as_ref().is_none_or(|inc| best.better_than(inc));
        if improved {
            incumbent = Some(best);
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= config.patience {
                step *= config.shrink;
                stagnant = 0;
            }
        }
        let inc = incumbent.as_ref().expect("set after first generation");
        mean = vars
            .iter()
            .zip(&inc.x.0)
            .map(|(v, &x)| (x - v.lower) / v.width())
            .collect();
        history.push(inc.objective);
    }

    let inc = incumbent.expect("at least one generation ran");
    if !inc.feasible() {
        return Err(BaselineError::NoFeasible {
            best: inc.x,
            objective: inc.objective,
            evaluations,
        });
    }
    Ok((
        BaselineResult {
            qois: defined_qois(&inc.qois),
            x_baseline: inc.x,
            objective: inc.objective,
            evaluations_used: evaluations,
            seed: Some(seed),
        },
        history,
    ))
}

fn defined_qois(qois: &QoiValues) -> BTreeMap<String, f64> {
    qois.values
        .iter()
        .filter_map(|(k, v)| v.map(|v| (k.clone(), v)))
        .collect()
}

/// Wraps a literal design as a baseline after checking it is feasible.
pub fn evaluate_baseline(
    problem: &Problem,
    x: DesignPoint,
    weights: &BTreeMap<String, f64>,
) -> Result<BaselineResult, BaselineError> {
    let qois = problem.evaluate(&x)?;
    if !qois.is_feasible() {
        let why = match (qois.infeasible, qois.timed_out) {
            (Some(reason), _) => format!("{reason:?}"),
            (None, true) => "simulation timed out".to_string(),
            _ => "undefined quantities of interest".to_string(),
        };
        return Err(BaselineError::Infeasible(why));
    }
    Ok(BaselineResult {
        objective: scalarize(&qois, weights),
        qois: defined_qois(&qois),
        x_baseline: x,
        evaluations_used: 1,
        seed: None,
    })
}

/// One `<=` requirement per baseline QoI, with the baseline value as the
/// threshold and no slack.
pub fn derive_requirements(baseline: &BaselineResult) -> Vec<Requirement> {
    baseline
        .qois
        .iter()
        .map(|(q, &v)| Requirement::less_equal(q, v))
        .collect()
}
