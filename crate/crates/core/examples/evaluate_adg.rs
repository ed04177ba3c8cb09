//! Build an attribute dependency graph with a custom mapping, check it and
//! classify a few designs against a requirement.
//!
//!     cargo run --example evaluate_adg

use solspace::adg::{Arity, MappingRegistry};
use solspace::{validate_adg, Problem, ProblemFile};

const BEAM: &str = r#"{
  "variables": [
    {"name": "w", "unit": "m", "kind": "geometry", "lower": 0.01, "upper": 0.1},
    {"name": "h", "unit": "m", "kind": "geometry", "lower": 0.01, "upper": 0.2}
  ],
  "adg": {
    "nodes": [
      {"name": "w", "kind": "dv"},
      {"name": "h", "kind": "dv"},
      {"name": "area", "kind": "intermediate"},
      {"name": "stiffness", "kind": "qoi"},
      {"name": "mass", "kind": "qoi"}
    ],
    "edges": [["w", "area"], ["h", "area"], ["w", "stiffness"], ["h", "stiffness"], ["area", "mass"]],
    "mappings": {"area": "product", "stiffness": "second_moment", "mass": "steel_mass"}
  },
  "requirements": [
    {"id": "light", "qoi": "mass", "comparator": "less_equal", "threshold": 40.0},
    {"id": "stiff", "qoi": "stiffness", "comparator": "greater_equal", "threshold": 2e-6}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut registry = MappingRegistry::standard();
    registry.register_scalar("second_moment", Arity::Exactly(2), |a| a[0][0] * a[1][0].powi(3) / 12.0);
    // One metre of steel.
    registry.register_scalar("steel_mass", Arity::Exactly(1), |a| 7850.0 * a[0][0]);

    let file = ProblemFile::from_json(BEAM)?;
    let report = validate_adg(&file.adg, &registry);
    println!("evaluation order: {:?}", report.order.as_deref().unwrap_or_default());

    let problem = Problem::with_registry(file, &registry)?;
    for x in [[0.03, 0.15], [0.05, 0.15], [0.02, 0.05]] {
        let point = solspace::DesignPoint(x.to_vec());
        let q = problem.evaluate(&point)?;
        let c = problem.classify_qois(&q);
        let verdict = if c.is_good() {
            "good".to_string()
        } else {
            format!("bad, violates {:?}", c.violated)
        };
        println!(
            "w = {:.2}, h = {:.2}: mass {:.1} kg, I = {:.2e} m^4 -> {verdict}",
            x[0],
            x[1],
            q.get("mass").unwrap_or(f64::NAN),
            q.get("stiffness").unwrap_or(f64::NAN),
        );
    }

    // A broken graph is reported, not evaluated.
    let mut cyclic = ProblemFile::from_json(BEAM)?.adg;
    cyclic.edges.push(("mass".into(), "area".into()));
    for d in validate_adg(&cyclic, &registry).defects {
        println!("defect: {d}");
    }
    Ok(())
}
