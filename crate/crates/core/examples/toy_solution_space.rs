//! Solution box for x1 + x2 <= 1 on the unit square. The largest such box
//! is [0, 0.5] x [0, 0.5] with volume 0.25.
//!
//!     cargo run --example toy_solution_space

use solspace::boxsolver::Phase;
use solspace::{mu, solve_box, validate_box, DesignPoint, Problem, SolverParams};

const TOY: &str = include_str!("../problems/toy_sum.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::from_json(TOY)?;
    let params = SolverParams::default();
    let (b, trace) = solve_box(&problem, &DesignPoint(vec![0.25, 0.25]), &params)?;

    for r in &trace.records {
        let phase = match r.phase {
            Phase::Explore => "explore",
            Phase::Consolidate => "consolidate",
        };
        println!("{phase:<11} {:>3}: mu {:.4}, bad {:.3}", r.iteration, r.mu, r.bad_fraction);
    }
    let purity = validate_box(&problem, &b, 10_000, 1)?;
    println!("box {:?}", b.intervals);
    println!("mu {:.4}, purity {:.4}", mu(&b, &problem), purity.purity);
    Ok(())
}
