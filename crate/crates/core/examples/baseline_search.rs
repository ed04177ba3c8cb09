//! Search for a baseline arm design with the evolution strategy and turn its
//! performance into requirements.
//!
//!     cargo run --release --example baseline_search [budget] [seed]

use solspace::baseline::{default_weights, optimize_baseline_traced, EsConfig};
use solspace::{derive_requirements, Problem, ARM_PROBLEM};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let budget = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let problem = Problem::from_json(ARM_PROBLEM)?;
    let weights = default_weights(&problem);
    println!("weights: {weights:?}");
    let (best, history) = optimize_baseline_traced(&problem, &weights, budget, seed, EsConfig::default())?;

    for (g, f) in history.iter().enumerate().step_by(10) {
        println!("generation {g:>4}: {f:.4}");
    }
    println!("best objective {:.4} after {} evaluations", best.objective, best.evaluations_used);
    for (v, x) in problem.variables().iter().zip(&best.x_baseline.0) {
        println!("  {:<9} {x:>10.4} {}", v.name, v.unit);
    }
    for r in derive_requirements(&best) {
        println!("requirement: {} <= {}", r.qoi, r.threshold);
    }
    Ok(())
}
