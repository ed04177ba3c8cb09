//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use solspace::baseline::{default_weights, optimize_baseline};
use solspace::boxsolver::recombined_designs;
use solspace::robot::{forward_kinematics, inverse_kinematics, pd_torque, ArmDynamics, ArmParams, Constants};
use solspace::sections::parse_section_json;
use solspace::{
    derive_requirements, export_section, make_section, mu, restrict_and_resolve, solve_box, validate_box,
    DesignBox, DesignPoint, DvKind, ExportFormat, Problem, SolverParams, Span, ARM_PROBLEM,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn toy(name: &str) -> Problem {
    let text = match name {
        "sum" => include_str!("../../core/problems/toy_sum.json"),
        "separable" => include_str!("../../core/problems/toy_separable.json"),
        _ => unreachable!(),
    };
    Problem::from_json(text).unwrap()
}

fn seed_of(p: &Problem) -> DesignPoint {
    DesignPoint(p.file().x_baseline.clone().unwrap())
}

fn analytic_box() -> Outcome {
    let p = toy("sum");
    let start = Instant::now();
    let (b, _) = solve_box(&p, &seed_of(&p), &SolverParams::default()).unwrap();
    let elapsed = start.elapsed();
    let m = mu(&b, &p);
    let purity = validate_box(&p, &b, 10_000, 1).unwrap().purity;
    outcome(
        m >= 0.225 && purity >= 0.99 && elapsed < Duration::from_secs(5),
        format!("mu {m:.4} (need >= 0.225), purity {purity:.4} (need >= 0.99), {elapsed:.2?}"),
    )
}

fn separable_toy() -> Outcome {
    let p = toy("separable");
    let (b, _) = solve_box(&p, &seed_of(&p), &SolverParams::default()).unwrap();
    let err = b
        .intervals
        .iter()
        .map(|&(lo, hi)| lo.abs().max((hi - 0.5).abs()))
        .fold(0.0, f64::max);
    outcome(err <= 0.05, format!("intervals {:?}, worst deviation {err:.4} (need <= 0.05)", b.intervals))
}

struct ArmRun {
    problem: Problem,
    b: DesignBox,
    purity: f64,
}

fn arm_codesign() -> (Outcome, Option<ArmRun>) {
    let start = Instant::now();
    let problem = Problem::from_json(ARM_PROBLEM).unwrap();
    let baseline = match optimize_baseline(&problem, &default_weights(&problem), 2000, 0) {
        Ok(b) => b,
        Err(e) => return (outcome(false, format!("baseline search failed: {e}")), None),
    };
    let constrained = problem.with_requirements(derive_requirements(&baseline)).unwrap();
    let (b, _) = solve_box(&constrained, &baseline.x_baseline, &SolverParams::default()).unwrap();
    let m = mu(&b, &constrained);
    let purity = validate_box(&constrained, &b, 2000, 0).unwrap().purity;
    let elapsed = start.elapsed();
    let feasible = problem.evaluate(&baseline.x_baseline).map(|q| q.is_feasible()).unwrap_or(false);
    let pass = feasible && m > 0.0 && purity >= 0.98 && elapsed < Duration::from_secs(600);
    let detail = format!(
        "baseline feasible {feasible} after {} evaluations, mu {m:.3e}, purity {purity:.4} (need >= 0.98), {elapsed:.1?}",
        baseline.evaluations_used
    );
    (
        outcome(pass, detail),
        Some(ArmRun {
            problem: constrained,
            b,
            purity,
        }),
    )
}

fn decoupling(run: Option<&ArmRun>) -> Outcome {
    let Some(run) = run else {
        return outcome(false, "no arm box".into());
    };
    let designs = recombined_designs(&run.problem, &run.b, DvKind::Control, 500, 11);
    let classes = run.problem.classify_batch(&designs).unwrap();
    let good = classes.iter().filter(|c| c.is_good()).count() as f64 / designs.len() as f64;
    outcome(good >= 0.98, format!("recombined good fraction {good:.4} over 500 (need >= 0.98)"))
}

fn tradeoff() -> Outcome {
    let p = toy("sum");
    let params = SolverParams::default();
    let (b, _) = solve_box(&p, &seed_of(&p), &params).unwrap();
    let (r, _) = restrict_and_resolve(&p, &b, "x1", (0.0, 0.2), &params).unwrap();
    let upper = r.intervals[1].1;
    outcome(upper >= 0.75, format!("x2 upper bound {upper:.4} (need >= 0.75)"))
}

fn physics() -> Outcome {
    let params = ArmParams {
        l1: 0.5,
        l2: 0.5,
        r_mot: 0.5,
        m_mot: 1.0,
        tau1_max: 40.0,
        tau2_max: 15.0,
        kp1: 800.0,
        kd1: 60.0,
        kp2: 400.0,
        kd2: 25.0,
    };
    let c = Constants::default();
    let d = ArmDynamics::new(&params, &c);
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut drift = 0.0f64;
    for _ in 0..5 {
        let mut q = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let mut qd = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let e0 = d.total_energy(q, qd);
        for _ in 0..1000 {
            (q, qd) = d.rk4_step(q, qd, [0.0, 0.0], 1e-3);
        }
        drift = drift.max((d.total_energy(q, qd) - e0).abs() / e0.abs().max(1e-12));
    }

    let mut balance = 0.0f64;
    let (mut q, mut qd) = ([-1.0, 0.5], [0.0, 0.0]);
    for _ in 0..1500 {
        let (tau, _) = pd_torque(&params, [0.3, 1.2], q, qd);
        let (q1, qd1) = d.rk4_step(q, qd, tau, c.dt);
        let de_dt = (d.total_energy(q1, qd1) - d.total_energy(q, qd)) / c.dt;
        let power = 0.5 * (tau[0] * (qd[0] + qd1[0]) + tau[1] * (qd[1] + qd1[1]));
        let scale = (tau[0] * qd[0]).abs() + (tau[1] * qd[1]).abs();
        if scale > 1e-2 {
            balance = balance.max((de_dt - power).abs() / scale);
        }
        (q, qd) = (q1, qd1);
    }

    let mut round_trip = 0.0f64;
    for _ in 0..10_000 {
        let l1 = rng.random_range(0.2..1.5);
        let l2 = rng.random_range(0.2..1.5);
        let p = ArmParams { l1, l2, ..params };
        let r = rng.random_range((l1 - l2).abs() + 1e-6..l1 + l2 - 1e-6);
        let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let target = [r * phi.cos(), r * phi.sin()];
        let ee = forward_kinematics(&p, inverse_kinematics(&p, target).unwrap());
        round_trip = round_trip.max((ee[0] - target[0]).hypot(ee[1] - target[1]));
    }

    outcome(
        drift <= 1e-6 && balance <= 1e-3 && round_trip <= 1e-9,
        format!("energy drift {drift:.2e}, power balance {balance:.2e}, IK/FK {round_trip:.2e} m"),
    )
}

fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["solspace"];
    argv.extend_from_slice(args);
    solspace_app::cli::run_command(argv)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let problem = tmp.path().join("arm.json");
    std::fs::write(&problem, ARM_PROBLEM).unwrap();
    let problem = problem.to_str().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        let out = d.to_str().unwrap();
        for cmd in ["baseline", "solve"] {
            let code = cli(&["--problem", problem, "--out", out, "--seed", "7", cmd]);
            if code != 0 {
                return outcome(false, format!("`{cmd} --seed 7` exited with {code}"));
            }
        }
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    let differing: Vec<&str> = ["baseline.json", "box.json", "trace.json"]
        .into_iter()
        .filter(|f| read(&dirs[0], f) != read(&dirs[1], f))
        .collect();
    let detail = if differing.is_empty() {
        "baseline.json, box.json and trace.json byte-identical across two runs".to_string()
    } else {
        format!("differing files: {differing:?}")
    };
    outcome(differing.is_empty(), detail)
}

fn section_check(problem: &Problem, b: &DesignBox, purity: f64, dims: (usize, usize), span: Span, seed: u64) -> Result<f64, String> {
    let s = make_section(problem, b, dims, 2000, seed, span).unwrap();
    let back = parse_section_json(&export_section(&s, ExportFormat::Json)).unwrap();
    for pt in &back.points {
        if problem.classify_point(&pt.x).unwrap() != pt.classification {
            return Err(format!("section {dims:?}: point {:?} re-classifies differently", pt.x.0));
        }
    }
    let inside: Vec<_> = back.points.iter().filter(|pt| b.contains(&pt.x)).collect();
    let good = inside.iter().filter(|pt| pt.classification.is_good()).count() as f64 / inside.len().max(1) as f64;
    if good < purity - 0.02 {
        return Err(format!("section {dims:?}: in-box good {good:.4} below purity {purity:.4} - 0.02"));
    }
    Ok(good)
}

fn sections(run: Option<&ArmRun>) -> Outcome {
    let p = toy("sum");
    let (b, _) = solve_box(&p, &seed_of(&p), &SolverParams::default()).unwrap();
    let purity = validate_box(&p, &b, 2000, 0).unwrap().purity;
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    let mut cases = vec![(p.clone(), b.clone(), purity, (0, 1), Span::DesignSpace)];
    if let Some(r) = run {
        for dims in [(0, 1), (4, 6), (6, 8), (2, 9)] {
            cases.push((r.problem.clone(), r.b.clone(), r.purity, dims, Span::Box));
        }
    }
    for (k, (problem, b, purity, dims, span)) in cases.into_iter().enumerate() {
        match section_check(&problem, &b, purity, dims, span, k as u64) {
            Ok(g) => {
                worst = worst.min(g - purity);
                checked += 1;
            }
            Err(e) => return outcome(false, e),
        }
    }
    outcome(
        run.is_some(),
        format!("{checked} sections re-classify identically; worst in-box good minus purity {worst:+.4}"),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n} [{status}] {name}: {}", o.detail);
    };
    report(1, "analytic box optimality", analytic_box());
    report(2, "separable toy", separable_toy());
    let (arm, run) = arm_codesign();
    report(3, "arm co-design", arm);
    report(4, "decoupling", decoupling(run.as_ref()));
    report(5, "trade-off", tradeoff());
    report(6, "simulator physics", physics());
    report(7, "determinism", determinism());
    report(8, "section consistency", sections(run.as_ref()));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
