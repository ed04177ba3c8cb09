//! Save a complete run directory with its manifest and read it back.
//!
//!     cargo run --example persist_run [dir]

use solspace::baseline::{default_weights, evaluate_baseline};
use solspace::run::{load_run, persist_run, BoxRecord, RunRecord};
use solspace::{
    derive_requirements, make_section, mu, solve_box, validate_box, DesignPoint, Problem, SolverParams, Span,
};

const TOY: &str = include_str!("../problems/toy_sum.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "runs/toy".into());
    let problem = Problem::from_json(TOY)?;
    let x = DesignPoint(vec![0.25, 0.25]);
    let baseline = evaluate_baseline(&problem, x.clone(), &default_weights(&problem))?;
    let solved = problem.with_requirements(derive_requirements(&baseline))?;

    let params = SolverParams::with_seed(42);
    let (b, trace) = solve_box(&solved, &x, &params)?;
    let run = RunRecord {
        problem: problem.file().clone(),
        baseline,
        box_record: BoxRecord {
            mu: mu(&b, &solved),
            purity: validate_box(&solved, &b, 2000, 42)?.purity,
            intervals: b.intervals.clone(),
            seed: 42,
            params,
        },
        trace,
        sections: vec![make_section(&solved, &b, (0, 1), 500, 43, Span::DesignSpace)?],
    };

    let manifest = persist_run(&dir, &run)?;
    for f in &manifest.files {
        println!("{:<32} {}", f.path, &f.sha256[..16]);
    }
    assert_eq!(load_run(&dir)?, run);
    println!("run in {dir} reloads identically");
    Ok(())
}
