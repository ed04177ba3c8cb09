//! Export 2D design sections of a solution box as JSON, CSV and SVG.
//!
//!     cargo run --example design_sections [out-dir]

use std::path::PathBuf;

use solspace::{export_section, make_section, solve_box, DesignPoint, ExportFormat, Problem, SolverParams, Span};

const TOY: &str = include_str!("../problems/toy_separable.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sections".into()));
    std::fs::create_dir_all(&out)?;

    let problem = Problem::from_json(TOY)?;
    let (b, _) = solve_box(&problem, &DesignPoint(vec![0.25, 0.25]), &SolverParams::default())?;

    for (span, name) in [(Span::DesignSpace, "design_space"), (Span::Box, "box")] {
        let s = make_section(&problem, &b, (0, 1), 1500, 0, span)?;
        let good = s.points.iter().filter(|p| p.classification.is_good()).count();
        println!("{name}: {good}/{} good, priority {:?}", s.points.len(), s.priority);
        for format in [ExportFormat::Json, ExportFormat::Csv, ExportFormat::Svg] {
            let path = out.join(format!("{name}.{}", format.extension()));
            std::fs::write(&path, export_section(&s, format))?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}
