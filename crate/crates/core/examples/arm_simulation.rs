//! Simulate one pick-and-place cycle of the two-link arm and write the
//! joint trajectory as CSV.
//!
//!     cargo run --release --example arm_simulation [out.csv]

use solspace::robot::{simulate_cycle, trajectory_csv, ArmParams, SimOptions};
use solspace::{Problem, ARM_PROBLEM};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::from_json(ARM_PROBLEM)?;
    let task = problem.file().task.expect("arm problem has a task");
    let constants = problem.file().constants.unwrap_or_default();

    let arm = ArmParams {
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
    let r = simulate_cycle(&arm, &constants, &task, SimOptions { record_every: 10 })?;
    println!("reachable: {}", r.reachable);
    println!("cycle time: {:?} s (timed out: {})", r.t_cyc, r.timed_out);
    println!("energy: {:?} J", r.energy);
    println!("saturated: {:.1}% / {:.1}% of steps", 100.0 * r.saturation_fraction[0], 100.0 * r.saturation_fraction[1]);

    // Same arm without torque limits.
    let free = simulate_cycle(&arm.unsaturated(), &constants, &task, SimOptions::default())?;
    println!("unsaturated cycle time: {:?} s", free.t_cyc);

    let out = std::env::args().nth(1).unwrap_or_else(|| "trajectory.csv".into());
    std::fs::write(&out, trajectory_csv(&r.trajectory))?;
    println!("{} samples written to {out}", r.trajectory.len());
    Ok(())
}
