//! Maximal requirement-satisfying design boxes.
//!
//! The solver looks for the axis-aligned box of design-variable intervals with
//! the largest normalized volume whose interior designs all classify as good.
//! It alternates Monte Carlo sampling, trimming (cutting the box at bad
//! samples so that as many good samples as possible stay inside) and growth,
//! then consolidates without growth until a whole batch comes back clean.
//!
//! Runs are bit-reproducible: all randomness flows from one seeded ChaCha
//! stream and batch classifications are gathered in sample order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adg::{Classification, DesignPoint, DvKind};
use crate::problem::{Problem, ProblemError};

/// Axis-aligned box: one closed interval per design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignBox {
    pub intervals: Vec<(f64, f64)>,
}

impl DesignBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Self {
        Self { intervals }
    }

    /// The whole design space of `problem`.
    pub fn full(problem: &Problem) -> Self {
        Self::new(problem.variables().iter().map(|v| (v.lower, v.upper)).collect())
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, x: &DesignPoint) -> bool {
        x.dim() == self.dim()
            && self
                .intervals
                .iter()
                .zip(&x.0)
                .all(|(&(lo, hi), &v)| v >= lo && v <= hi)
    }

    /// Checks dimension, ordering and containment in the design space.
    pub fn validate(&self, problem: &Problem) -> Result<(), SolveError> {
        if self.dim() != problem.dim() {
            return Err(SolveError::InvalidBox(format!(
                "box has {} intervals, problem has {} variables",
                self.dim(),
                problem.dim()
            )));
        }
        for (v, &(lo, hi)) in problem.variables().iter().zip(&self.intervals) {
            if !(lo <= hi && lo >= v.lower && hi <= v.upper) {
                return Err(SolveError::InvalidBox(format!(
                    "interval [{lo}, {hi}] for {} is not inside [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Samples per iteration.
    pub n_samples: usize,
    /// Initial growth factor (> 1).
    pub growth: f64,
    /// Shrinks the growth excess `growth - 1` whenever a grow-trim round
    /// fails to enlarge the box.
    pub growth_decay: f64,
    pub phase1_max_iters: usize,
    pub phase2_max_iters: usize,
    /// Relative change of μ below which an iteration counts as stagnant.
    pub stagnation_tol: f64,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            n_samples: 100,
            growth: 1.3,
            growth_decay: 0.8,
            phase1_max_iters: 50,
            phase2_max_iters: 20,
            stagnation_tol: 1e-3,
            seed: 0,
        }
    }
}

impl SolverParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.n_samples < 10 {
            return Err(SolveError::InvalidParams(format!(
                "n_samples must be at least 10, got {}",
                self.n_samples
            )));
        }
        if !(self.growth > 1.0) {
            return Err(SolveError::InvalidParams(format!(
                "growth must exceed 1, got {}",
                self.growth
            )));
        }
        if !(self.growth_decay > 0.0 && self.growth_decay < 1.0) {
            return Err(SolveError::InvalidParams(format!(
                "growth_decay must lie in (0, 1), got {}",
                self.growth_decay
            )));
        }
        Ok(())
    }
}

/// Steps until three consecutive explore iterations change μ by less than
/// the stagnation tolerance.
const STAGNANT_ITERATIONS: usize = 3;

/// Width of the initial box around the seed, as a fraction of the design
/// space.
const SEED_BOX_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Explore,
    Consolidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phase: Phase,
    /// μ of `intervals` (after trimming).
    pub mu: f64,
    /// Fraction of this iteration's samples that were bad.
    pub bad_fraction: f64,
    pub growth: f64,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("seed design is bad: violates {}", .violated.join(", "))]
    InfeasibleSeed { violated: Vec<String> },
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("unknown design variable {0}")]
    UnknownVariable(String),
    #[error(
        "interval [{lower}, {upper}] for {dv} is not nested in the current interval [{cur_lower}, {cur_upper}]"
    )]
    NotNested {
        dv: String,
        lower: f64,
        upper: f64,
        cur_lower: f64,
        cur_upper: f64,
    },
    #[error("restricted box contains no good design in the first batch of {0} samples")]
    NoGoodSample(usize),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Normalized volume Π (uᵢ − lᵢ) / (design-space width ᵢ).
pub fn mu(b: &DesignBox, problem: &Problem) -> f64 {
    b.intervals
        .iter()
        .zip(problem.variables())
        .map(|(&(lo, hi), v)| (hi - lo) / v.width())
        .product()
}

/// `n` independent points, uniform in `b`.
pub fn sample_uniform<R: Rng + ?Sized>(b: &DesignBox, n: usize, rng: &mut R) -> Vec<DesignPoint> {
    (0..n).map(|_| sample_point(b, rng)).collect()
}

fn sample_point<R: Rng + ?Sized>(b: &DesignBox, rng: &mut R) -> DesignPoint {
    DesignPoint(
        b.intervals
            .iter()
            .map(|&(lo, hi)| {
                let u: f64 = rng.random();
                (lo + u * (hi - lo)).clamp(lo, hi)
            })
            .collect(),
    )
}

fn inside_closed(intervals: &[(f64, f64)], x: &[f64]) -> bool {
    intervals
        .iter()
        .zip(x)
        .all(|(&(lo, hi), &v)| v >= lo && v <= hi)
}

/// Cuts `b` until no bad sample remains in its interior.
pub fn trim(b: &DesignBox, samples: &[(DesignPoint, Classification)], problem: &Problem) -> DesignBox {
    trim_frozen(b, samples, problem, &vec![false; b.dim()])
}

/// [`trim`] that never cuts the dimensions flagged in `frozen`.
///
/// Bad samples are handled in list order. For each bad sample still inside
/// the box every admissible cut through it is scored by the number of good
/// samples it keeps; ties go to the larger μ, then to the lower dimension,
/// then to keeping the lower part. The sample on the cut plane counts as
/// removed.
pub fn trim_frozen(
    b: &DesignBox,
    samples: &[(DesignPoint, Classification)],
    problem: &Problem,
    frozen: &[bool],
) -> DesignBox {
    let widths: Vec<f64> = problem.variables().iter().map(|v| v.width()).collect();
    let good: Vec<&[f64]> = samples
        .iter()
        .filter(|(_, c)| c.is_good())
        .map(|(x, _)| x.0.as_slice())
        .collect();
    let mut cur = b.intervals.clone();
    let mut candidate = cur.clone();
    for (x, _) in samples.iter().filter(|(_, c)| !c.is_good()) {
        let x = &x.0;
        if !inside_closed(&cur, x) {
            continue;
        }
        // A previous cut plane through this point already removed it.
        if cur
            .iter()
            .zip(x)
            .zip(frozen)
            .any(|((&(lo, hi), &v), &f)| !f && (v == lo || v == hi))
        {
            continue;
        }
        // (good kept, mu, dim, keep_upper)
        let mut best: Option<(usize, f64, usize, bool)> = None;
        for dim in (0..cur.len()).filter(|&d| !frozen[d]) {
            for keep_upper in [false, true] {
                candidate.copy_from_slice(&cur);
                if keep_upper {
                    candidate[dim].0 = x[dim];
                } else {
                    candidate[dim].1 = x[dim];
                }
                let kept = good.iter().filter(|g| inside_closed(&candidate, g)).count();
                let vol: f64 = candidate
                    .iter()
                    .zip(&widths)
                    .map(|(&(lo, hi), w)| (hi - lo) / w)
                    .product();
                let better = match best {
                    None => true,
                    Some((bk, bm, _, _)) => kept > bk || (kept == bk && vol > bm),
                };
                if better {
                    best = Some((kept, vol, dim, keep_upper));
                }
            }
        }
        if let Some((_, _, dim, keep_upper)) = best {
            if keep_upper {
                cur[dim].0 = x[dim];
            } else {
                cur[dim].1 = x[dim];
            }
        }
    }
    DesignBox::new(cur)
}

/// Scales every interval about its midpoint by `factor`, clipped to the
/// design space.
pub fn grow(b: &DesignBox, factor: f64, problem: &Problem) -> DesignBox {
    grow_frozen(b, factor, problem, &vec![false; b.dim()])
}

pub fn grow_frozen(b: &DesignBox, factor: f64, problem: &Problem, frozen: &[bool]) -> DesignBox {
    assert!(factor >= 1.0, "growth factor must be at least 1, got {factor}");
    DesignBox::new(
        b.intervals
            .iter()
            .zip(problem.variables())
            .zip(frozen)
            .map(|((&(lo, hi), v), &f)| {
                if f || factor == 1.0 {
                    return (lo, hi);
                }
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo) * factor;
                ((mid - half).max(v.lower).min(lo), (mid + half).min(v.upper).max(hi))
            })
            .collect(),
    )
}

/// Box of width `SEED_BOX_FRACTION` of the design space around `seed`.
pub fn seed_box(problem: &Problem, seed: &DesignPoint) -> DesignBox {
    DesignBox::new(
        problem
            .variables()
            .iter()
            .zip(&seed.0)
            .map(|(v, &s)| {
                let half = 0.5 * SEED_BOX_FRACTION * v.width();
                ((s - half).max(v.lower), (s + half).min(v.upper))
            })
            .collect(),
    )
}

fn classify_samples(
    problem: &Problem,
    b: &DesignBox,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(DesignPoint, Classification)>, SolveError> {
    let points = sample_uniform(b, n, rng);
    let classes = problem.classify_batch(&points)?;
    Ok(points.into_iter().zip(classes).collect())
}

fn bad_fraction(samples: &[(DesignPoint, Classification)]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|(_, c)| !c.is_good()).count() as f64 / samples.len() as f64
}

/// Finds the largest box around `seed_point` whose sampled interior is good.
///
/// The seed takes part in every trim as a known good sample while it lies in
/// the box; the returned box need not contain it.
pub fn solve_box(
    problem: &Problem,
    seed_point: &DesignPoint,
    params: &SolverParams,
) -> Result<(DesignBox, SolverTrace), SolveError> {
    params.validate()?;
    let cls = problem.classify_point(seed_point)?;
    if !cls.is_good() {
        return Err(SolveError::InfeasibleSeed {
            violated: cls.violated.into_iter().collect(),
        });
    }
    let start = seed_box(problem, seed_point);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let frozen = vec![false; problem.dim()];
    let first = classify_samples(problem, &start, params.n_samples, &mut rng)?;
    run_phases(
        problem,
        start,
        first,
        &[(seed_point.clone(), cls)],
        &frozen,
        params,
        &mut rng,
    )
}

/// Narrows `dv` to `new_interval` and re-solves the remaining variables
/// starting from the restricted box. `dv` keeps exactly `new_interval`.
pub fn restrict_and_resolve(
    problem: &Problem,
    b: &DesignBox,
    dv: &str,
    new_interval: (f64, f64),
    params: &SolverParams,
) -> Result<(DesignBox, SolverTrace), SolveError> {
    params.validate()?;
    b.validate(problem)?;
    let index = problem
        .variable_index(dv)
        .ok_or_else(|| SolveError::UnknownVariable(dv.to_string()))?;
    let (cur_lower, cur_upper) = b.intervals[index];
    let (lower, upper) = new_interval;
    if !(lower <= upper && lower >= cur_lower && upper <= cur_upper) {
        return Err(SolveError::NotNested {
            dv: dv.to_string(),
            lower,
            upper,
            cur_lower,
            cur_upper,
        });
    }
    let mut start = b.clone();
    start.intervals[index] = new_interval;
    let mut frozen = vec![false; problem.dim()];
    frozen[index] = true;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let first = classify_samples(problem, &start, params.n_samples, &mut rng)?;
    let anchor = match first.iter().find(|(_, c)| c.is_good()) {
        Some(s) => s.clone(),
        None => return Err(SolveError::NoGoodSample(first.len())),
    };
    run_phases(problem, start, first, &[anchor], &frozen, params, &mut rng)
}

/// Samples seen so far that still lie in the box, including anchors
/// (designs already known to be good, such as the seed).
#[derive(Debug, Default)]
struct Evidence {
    samples: Vec<(DesignPoint, Classification)>,
}

impl Evidence {
    fn new(anchors: &[(DesignPoint, Classification)]) -> Self {
        Self {
            samples: anchors.to_vec(),
        }
    }

    /// Trims `b` with the fresh batch followed by the retained samples, then
    /// keeps whatever still lies in the result.
    fn trim(
        &mut self,
        b: &DesignBox,
        batch: Vec<(DesignPoint, Classification)>,
        problem: &Problem,
        frozen: &[bool],
    ) -> DesignBox {
        let mut all = batch;
        all.extend(self.samples.drain(..).filter(|(x, _)| b.contains(x)));
        let out = trim_frozen(b, &all, problem, frozen);
        all.retain(|(x, _)| out.contains(x));
        self.samples = all;
        out
    }
}

fn run_phases(
    problem: &Problem,
    start: DesignBox,
    first_batch: Vec<(DesignPoint, Classification)>,
    anchors: &[(DesignPoint, Classification)],
    frozen: &[bool],
    params: &SolverParams,
    rng: &mut ChaCha8Rng,
) -> Result<(DesignBox, SolverTrace), SolveError> {
    let mut trace = SolverTrace::default();
    let mut current = start;
    let mut growth = params.growth;
    let mut prev_mu: Option<f64> = None;
    let mut stagnant = 0usize;
    let mut batch = Some(first_batch);
    let mut evidence = Evidence::new(anchors);

    for iteration in 0..params.phase1_max_iters {
        let samples = match batch.take() {
            Some(s) => s,
            None => classify_samples(problem, &current, params.n_samples, rng)?,
        };
        let bad = bad_fraction(&samples);
        current = evidence.trim(&current, samples, problem, frozen);
        let m = mu(&current, problem);
        trace.records.push(TraceRecord {
            iteration,
            phase: Phase::Explore,
            mu: m,
            bad_fraction: bad,
            growth,
            intervals: current.intervals.clone(),
        });
        if let Some(p) = prev_mu {
            let change = if p > 0.0 { (m - p).abs() / p } else if m > 0.0 { f64::INFINITY } else { 0.0 };
            if change < params.stagnation_tol {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
            if m <= p {
                growth = 1.0 + (growth - 1.0) * params.growth_decay;
            }
        }
        prev_mu = Some(m);
        if stagnant >= STAGNANT_ITERATIONS || iteration + 1 == params.phase1_max_iters {
            break;
        }
        current = grow_frozen(&current, growth, problem, frozen);
    }
    if params.phase1_max_iters == 0 {
        // Still consume the first batch so the box honours it.
        if let Some(samples) = batch.take() {
            current = evidence.trim(&current, samples, problem, frozen);
        }
    }

    for iteration in 0..params.phase2_max_iters {
        let samples = classify_samples(problem, &current, params.n_samples, rng)?;
        let bad = bad_fraction(&samples);
        current = evidence.trim(&current, samples, problem, frozen);
        trace.records.push(TraceRecord {
            iteration,
            phase: Phase::Consolidate,
            mu: mu(&current, problem),
            bad_fraction: bad,
            growth: 1.0,
            intervals: current.intervals.clone(),
        });
        if bad == 0.0 {
            break;
        }
    }
    if trace.records.last().map(|r| &r.intervals) != Some(&current.intervals) {
        trace.records.push(TraceRecord {
            iteration: 0,
            phase: Phase::Consolidate,
            mu: mu(&current, problem),
            bad_fraction: 0.0,
            growth: 1.0,
            intervals: current.intervals.clone(),
        });
    }
    Ok((current, trace))
}

/// Fraction of fresh in-box samples that classify good.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Purity {
    pub purity: f64,
    pub samples: usize,
    /// Set when no samples were drawn and the purity is the 1.0 convention.
    pub warning: Option<String>,
}

pub fn validate_box(
    problem: &Problem,
    b: &DesignBox,
    n: usize,
    seed: u64,
) -> Result<Purity, SolveError> {
    b.validate(problem)?;
    if n == 0 {
        return Ok(Purity {
            purity: 1.0,
            samples: 0,
            warning: Some("no samples drawn; purity defaults to 1.0".to_string()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = classify_samples(problem, b, n, &mut rng)?;
    Ok(Purity {
        purity: 1.0 - bad_fraction(&samples),
        samples: n,
        warning: None,
    })
}

/// Designs assembled from two independent in-box draws: the variables of
/// `kind` come from the first draw, all others from the second.
pub fn recombined_designs(
    problem: &Problem,
    b: &DesignBox,
    kind: DvKind,
    n: usize,
    seed: u64,
) -> Vec<DesignPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask: Vec<bool> = problem.variables().iter().map(|v| v.kind == kind).collect();
    (0..n)
        .map(|_| {
            let a = sample_point(b, &mut rng);
            let c = sample_point(b, &mut rng);
            DesignPoint(
                mask.iter()
                    .zip(a.0.into_iter().zip(c.0))
                    .map(|(&m, (x, y))| if m { x } else { y })
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adg::Classification;

    const TOY_SUM: &str = include_str!("../problems/toy_sum.json");

    fn unit_square() -> Problem {
        Problem::from_json(TOY_SUM).unwrap()
    }

    fn good(x: &[f64]) -> (DesignPoint, Classification) {
        (DesignPoint(x.to_vec()), Classification::good())
    }

    fn bad(x: &[f64]) -> (DesignPoint, Classification) {
        (
            DesignPoint(x.to_vec()),
            Classification {
                violated: ["s".to_string()].into(),
                infeasible_reason: None,
            },
        )
    }

    #[test]
    fn mu_cases() {
        let p = unit_square();
        assert_eq!(mu(&DesignBox::full(&p), &p), 1.0);
        assert_eq!(mu(&DesignBox::new(vec![(0.3, 0.3), (0.0, 1.0)]), &p), 0.0);
        assert_eq!(mu(&DesignBox::new(vec![(0.0, 0.5), (0.25, 0.75)]), &p), 0.25);
    }

    #[test]
    fn sampling_contract() {
        let b = DesignBox::new(vec![(0.1, 0.2), (0.5, 0.5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_uniform(&b, 0, &mut rng).is_empty());
        let pts = sample_uniform(&b, 500, &mut rng);
        assert!(pts.iter().all(|x| b.contains(x)));
        let again = sample_uniform(&b, 500, &mut ChaCha8Rng::seed_from_u64(3));
        let first = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            let _ = sample_uniform(&b, 0, &mut r);
            sample_uniform(&b, 500, &mut r)
        };
        assert_eq!(again, first);
    }

    #[test]
    fn trim_picks_cut_keeping_most_good() {
        let p = unit_square();
        let b = DesignBox::full(&p);
        let samples = [good(&[0.2, 0.5]), good(&[0.3, 0.5]), bad(&[0.8, 0.6])];
        // Cuts: dim0 keep-lower keeps 2 (mu 0.8), dim0 keep-upper keeps 0,
        // dim1 keep-lower keeps 2 (mu 0.6), dim1 keep-upper keeps 0.
        let t = trim(&b, &samples, &p);
        assert_eq!(t.intervals, vec![(0.0, 0.8), (0.0, 1.0)]);
    }

    #[test]
    fn trim_without_bad_is_identity() {
        let p = unit_square();
        let b = DesignBox::new(vec![(0.1, 0.9), (0.2, 0.4)]);
        assert_eq!(trim(&b, &[good(&[0.5, 0.3])], &p), b);
    }

    #[test]
    fn trim_tie_break_lower_dim_lower_part() {
        let p = unit_square();
        let t = trim(&DesignBox::full(&p), &[bad(&[0.5, 0.5])], &p);
        assert_eq!(t.intervals, vec![(0.0, 0.5), (0.0, 1.0)]);
    }

    #[test]
    fn trim_skips_points_already_cut() {
        let p = unit_square();
        // The second bad point ends up outside after the first cut.
        let t = trim(
            &DesignBox::full(&p),
            &[bad(&[0.6, 0.5]), bad(&[0.7, 0.1]), good(&[0.1, 0.1])],
            &p,
        );
        assert_eq!(t.intervals, vec![(0.0, 0.6), (0.0, 1.0)]);
    }

    #[test]
    fn trim_respects_frozen_dimensions() {
        let p = unit_square();
        let t = trim_frozen(
            &DesignBox::full(&p),
            &[bad(&[0.5, 0.8]), good(&[0.1, 0.1])],
            &p,
            &[true, false],
        );
        assert_eq!(t.intervals, vec![(0.0, 1.0), (0.0, 0.8)]);
    }

    #[test]
    fn grow_cases() {
        let p = Problem::from_json(include_str!("../problems/toy_1d.json")).unwrap();
        let g = grow(&DesignBox::new(vec![(0.4, 0.6)]), 1.5, &p);
        assert!((g.intervals[0].0 - 0.35).abs() < 1e-12 && (g.intervals[0].1 - 0.65).abs() < 1e-12);
        let g = grow(&DesignBox::new(vec![(0.0, 0.2)]), 2.0, &p);
        assert!((g.intervals[0].0 - 0.0).abs() < 1e-12 && (g.intervals[0].1 - 0.3).abs() < 1e-12);
        let b = DesignBox::new(vec![(0.123, 0.456)]);
        assert_eq!(grow(&b, 1.0, &p), b);
    }

    #[test]
    fn infeasible_seed_rejected() {
        let p = unit_square();
        let err = solve_box(&p, &DesignPoint(vec![0.9, 0.9]), &SolverParams::default()).unwrap_err();
        assert_eq!(
            err,
            SolveError::InfeasibleSeed {
                violated: vec!["s".into()]
            }
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let p = unit_square();
        let params = SolverParams {
            n_samples: 5,
            ..SolverParams::default()
        };
        assert!(matches!(
            solve_box(&p, &DesignPoint(vec![0.1, 0.1]), &params),
            Err(SolveError::InvalidParams(_))
        ));
    }

    #[test]
    fn validate_box_empty_sample_convention() {
        let p = unit_square();
        let r = validate_box(&p, &DesignBox::full(&p), 0, 1).unwrap();
        assert_eq!(r.purity, 1.0);
        assert!(r.warning.is_some());
    }

    #[test]
    fn validate_box_inside_good_region() {
        let p = unit_square();
        let r = validate_box(&p, &DesignBox::new(vec![(0.0, 0.4), (0.1, 0.5)]), 1000, 1).unwrap();
        assert_eq!(r.purity, 1.0);
    }

    #[test]
    fn restrict_rejects_non_nested() {
        let p = unit_square();
        let b = DesignBox::new(vec![(0.0, 0.5), (0.0, 0.5)]);
        let err = restrict_and_resolve(&p, &b, "x1", (0.1, 0.7), &SolverParams::default()).unwrap_err();
        assert!(matches!(err, SolveError::NotNested { .. }));
        assert!(err.to_string().contains("not nested"));
        let err = restrict_and_resolve(&p, &b, "x1", (0.3, 0.2), &SolverParams::default()).unwrap_err();
        assert!(matches!(err, SolveError::NotNested { .. }));
        let err = restrict_and_resolve(&p, &b, "zz", (0.1, 0.2), &SolverParams::default()).unwrap_err();
        assert_eq!(err, SolveError::UnknownVariable("zz".into()));
    }

    #[test]
    fn restrict_into_bad_region_fails() {
        let p = unit_square();
        let b = DesignBox::full(&p);
        let b = DesignBox::new(vec![b.intervals[0], (0.95, 1.0)]);
        let err = restrict_and_resolve(&p, &b, "x1", (0.9, 1.0), &SolverParams::default()).unwrap_err();
        assert_eq!(err, SolveError::NoGoodSample(100));
    }

    #[test]
    fn recombined_designs_stay_in_box() {
        let p = unit_square();
        let b = DesignBox::new(vec![(0.1, 0.3), (0.6, 0.7)]);
        let xs = recombined_designs(&p, &b, DvKind::Control, 200, 9);
        assert_eq!(xs.len(), 200);
        assert!(xs.iter().all(|x| b.contains(x)));
    }
}
