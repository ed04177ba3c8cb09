//! The full co-design workflow on the arm: baseline, requirements, solution
//! box, and a check that control and hardware ranges can be chosen
//! independently.
//!
//!     cargo run --release --example arm_solution_space [seed]

use solspace::baseline::default_weights;
use solspace::boxsolver::recombined_designs;
use solspace::{
    derive_requirements, mu, optimize_baseline, solve_box, validate_box, DvKind, Problem, SolverParams,
    ARM_PROBLEM,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let arm = Problem::from_json(ARM_PROBLEM)?;
    let baseline = optimize_baseline(&arm, &default_weights(&arm), 2000, seed)?;
    println!("baseline: {:?}", baseline.qois);

    let problem = arm.with_requirements(derive_requirements(&baseline))?;
    let (b, trace) = solve_box(&problem, &baseline.x_baseline, &SolverParams::with_seed(seed))?;
    let purity = validate_box(&problem, &b, 2000, seed)?.purity;
    println!("{} iterations, mu {:.3e}, purity {purity:.4}", trace.records.len(), mu(&b, &problem));
    for (v, (lo, hi)) in problem.variables().iter().zip(&b.intervals) {
        println!("  {:<9} [{lo:.5}, {hi:.5}] {}", v.name, v.unit);
    }

    let designs = recombined_designs(&problem, &b, DvKind::Control, 500, seed + 1);
    let good = problem.classify_batch(&designs)?.iter().filter(|c| c.is_good()).count();
    println!("recombined control/hardware designs: {good}/500 good");
    Ok(())
}
