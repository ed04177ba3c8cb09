//! Give up range on one variable to gain range on another.
//!
//!     cargo run --example tradeoff

use solspace::{mu, restrict_and_resolve, solve_box, DesignPoint, Problem, SolverParams};

const TOY: &str = include_str!("../problems/toy_sum.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::from_json(TOY)?;
    let params = SolverParams::default();
    let (b, _) = solve_box(&problem, &DesignPoint(vec![0.25, 0.25]), &params)?;
    println!("before: x1 {:.3?}, x2 {:.3?}, mu {:.4}", b.intervals[0], b.intervals[1], mu(&b, &problem));

    for upper in [0.4, 0.3, 0.2, 0.1] {
        let (r, _) = restrict_and_resolve(&problem, &b, "x1", (0.0, upper), &params)?;
        println!("x1 <= {upper}: x2 {:.3?}, mu {:.4}", r.intervals[1], mu(&r, &problem));
    }

    // Widening is not a trade-off.
    if let Err(e) = restrict_and_resolve(&problem, &b, "x1", (0.0, 0.9), &params) {
        println!("rejected: {e}");
    }
    Ok(())
}
