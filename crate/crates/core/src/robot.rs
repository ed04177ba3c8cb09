//! Planar two-link arm used as the co-design surrogate.
//!
//! The arm moves in a vertical plane (gravity along −y). Both links are
//! uniform rods of linear density `rho`; the elbow motor is a point mass
//! mounted at `r_mot * l1` along link 1 and a point payload sits at the end
//! effector. Each joint runs a saturated PD law toward the inverse-kinematics
//! solution of the active target. A cycle goes from rest at the place pose to
//! the pick pose and back; the cycle time is the moment the second settle
//! completes.
//!
//! Design-variable correspondence with the original humanoid arm: the first
//! joint's torque limit, motor mass and PD gains map to `tau1_max`, `m_mot`,
//! `kp1`/`kd1`; the distal link length maps to `l2`; the link ratio that
//! positions the motor maps to `r_mot`.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adg::{Arity, DomainError, MappingOutput, MappingRegistry};

pub type Vec2 = [f64; 2];

/// Mapping name under which [`register_arm_mappings`] installs the cycle
/// simulation.
pub const ARM_CYCLE_MAPPING: &str = "arm_cycle";

/// Parent order expected by the `arm_cycle` mapping.
pub const ARM_CYCLE_INPUTS: [&str; 10] = [
    "l1", "l2", "r_mot", "m_mot", "tau1_max", "tau2_max", "kp1", "kd1", "kp2", "kd2",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmParams {
    pub l1: f64,
    pub l2: f64,
    pub r_mot: f64,
    pub m_mot: f64,
    pub tau1_max: f64,
    pub tau2_max: f64,
    pub kp1: f64,
    pub kd1: f64,
    pub kp2: f64,
    pub kd2: f64,
}

impl ArmParams {
    /// Builds parameters from values in [`ARM_CYCLE_INPUTS`] order.
    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            l1: v[0],
            l2: v[1],
            r_mot: v[2],
            m_mot: v[3],
            tau1_max: v[4],
            tau2_max: v[5],
            kp1: v[6],
            kd1: v[7],
            kp2: v[8],
            kd2: v[9],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("l1", self.l1),
            ("l2", self.l2),
            ("m_mot", self.m_mot),
            ("tau1_max", self.tau1_max),
            ("tau2_max", self.tau2_max),
            ("kp1", self.kp1),
            ("kd1", self.kd1),
            ("kp2", self.kp2),
            ("kd2", self.kd2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.r_mot) {
            return Err(format!("r_mot must lie in [0, 1], got {}", self.r_mot));
        }
        Ok(())
    }

    pub fn torque_limits(&self) -> Vec2 {
        [self.tau1_max, self.tau2_max]
    }

    /// Same arm with both torque limits lifted to infinity.
    pub fn unsaturated(&self) -> Self {
        Self {
            tau1_max: f64::INFINITY,
            tau2_max: f64::INFINITY,
            ..*self
        }
    }
}

/// Fixed physical and numerical constants of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Link mass per unit length (kg/m).
    pub rho: f64,
    /// End-effector payload (kg).
    pub payload: f64,
    pub gravity: f64,
    /// RK4 step (s).
    pub dt: f64,
    /// Reachability margin as a fraction of `l1 + l2`.
    pub margin_ratio: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            rho: 2.0,
            payload: 0.5,
            gravity: 9.81,
            dt: 1e-3,
            margin_ratio: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub pick: Vec2,
    pub place: Vec2,
    /// End-effector settle tolerance (m).
    pub eps_pos: f64,
    /// Joint-speed settle tolerance (rad/s).
    pub omega_tol: f64,
    /// How long both tolerances must hold continuously (s).
    pub t_hold: f64,
    /// Simulation cap (s).
    pub t_max: f64,
}

impl Task {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.eps_pos > 0.0) {
            return Err(format!("eps_pos must be positive, got {}", self.eps_pos));
        }
        if !(self.t_hold >= 0.0) {
            return Err(format!("t_hold must be non-negative, got {}", self.t_hold));
        }
        if !(self.t_max > 0.0) {
            return Err(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(self.omega_tol > 0.0) {
            return Err(format!("omega_tol must be positive, got {}", self.omega_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("target ({}, {}) lies outside the reachable annulus", target[0], target[1])]
pub struct WorkspaceError {
    pub target: Vec2,
}

pub fn forward_kinematics(params: &ArmParams, q: Vec2) -> Vec2 {
    let (l1, l2) = (params.l1, params.l2);
    [
        l1 * q[0].cos() + l2 * (q[0] + q[1]).cos(),
        l1 * q[0].sin() + l2 * (q[0] + q[1]).sin(),
    ]
}

/// Elbow branch with `q2` in `[0, π]`.
pub fn inverse_kinematics(params: &ArmParams, target: Vec2) -> Result<Vec2, WorkspaceError> {
    let (l1, l2) = (params.l1, params.l2);
    let [x, y] = target;
    let d = x.hypot(y);
    if d > l1 + l2 || d < (l1 - l2).abs() {
        return Err(WorkspaceError { target });
    }
    let c2 = ((x * x + y * y - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let s2 = (1.0 - c2 * c2).max(0.0).sqrt();
    let q2 = s2.atan2(c2);
    let q1 = y.atan2(x) - (l2 * s2).atan2(l1 + l2 * c2);
    Ok([q1, q2])
}

/// Whether each of (pick, place) lies inside the annulus shrunk by the
/// reachability margin.
pub fn reachability_check(params: &ArmParams, constants: &Constants, task: &Task) -> [bool; 2] {
    let margin = constants.margin_ratio * (params.l1 + params.l2);
    [
        reachable_with_margin(params, task.pick, margin),
        reachable_with_margin(params, task.place, margin),
    ]
}

pub fn reachable_with_margin(params: &ArmParams, target: Vec2, margin: f64) -> bool {
    let d = target[0].hypot(target[1]);
    d >= (params.l1 - params.l2).abs() + margin && d <= params.l1 + params.l2 - margin
}

/// Lumped inertial properties of the two links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmDynamics {
    l1: f64,
    /// First moment of link 1 (rod + motor) about joint 1.
    s1: f64,
    /// Inertia of link 1 about joint 1.
    i1: f64,
    /// Total mass carried by link 2 (rod + payload).
    m2: f64,
    /// First moment of link 2 about joint 2.
    s2: f64,
    /// Inertia of link 2 about joint 2.
    i2: f64,
    gravity: f64,
}

impl ArmDynamics {
    pub fn new(params: &ArmParams, constants: &Constants) -> Self {
        let (l1, l2) = (params.l1, params.l2);
        let rod1 = constants.rho * l1;
        let rod2 = constants.rho * l2;
        let r = params.r_mot * l1;
        let mp = constants.payload;
        Self {
            l1,
            s1: rod1 * l1 / 2.0 + params.m_mot * r,
            i1: rod1 * l1 * l1 / 3.0 + params.m_mot * r * r,
            m2: rod2 + mp,
            s2: rod2 * l2 / 2.0 + mp * l2,
            i2: rod2 * l2 * l2 / 3.0 + mp * l2 * l2,
            gravity: constants.gravity,
        }
    }

    pub fn with_gravity(self, gravity: f64) -> Self {
        Self { gravity, ..self }
    }

    /// Symmetric positive definite inertia matrix as (m11, m12, m22).
    pub fn mass_matrix(&self, q: Vec2) -> (f64, f64, f64) {
        let c2 = q[1].cos();
        let k = self.s2 * self.l1 * c2;
        let m22 = self.i2;
        let m12 = self.i2 + k;
        let m11 = self.i1 + self.i2 + self.m2 * self.l1 * self.l1 + 2.0 * k;
        (m11, m12, m22)
    }

    /// Coriolis/centrifugal torques C(q, q̇)·q̇.
    pub fn coriolis(&self, q: Vec2, qd: Vec2) -> Vec2 {
        let h = self.s2 * self.l1 * q[1].sin();
        [
            -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]),
            h * qd[0] * qd[0],
        ]
    }

    /// Gravity torques, the gradient of [`Self::potential_energy`].
    pub fn gravity_torque(&self, q: Vec2) -> Vec2 {
        let c1 = q[0].cos();
        let c12 = (q[0] + q[1]).cos();
        let g = self.gravity;
        [
            g * ((self.s1 + self.m2 * self.l1) * c1 + self.s2 * c12),
            g * self.s2 * c12,
        ]
    }

    pub fn potential_energy(&self, q: Vec2) -> f64 {
        let g = self.gravity;
        g * ((self.s1 + self.m2 * self.l1) * q[0].sin() + self.s2 * (q[0] + q[1]).sin())
    }

    pub fn kinetic_energy(&self, q: Vec2, qd: Vec2) -> f64 {
        let (m11, m12, m22) = self.mass_matrix(q);
        0.5 * (m11 * qd[0] * qd[0] + 2.0 * m12 * qd[0] * qd[1] + m22 * qd[1] * qd[1])
    }

    pub fn total_energy(&self, q: Vec2, qd: Vec2) -> f64 {
        self.kinetic_energy(q, qd) + self.potential_energy(q)
    }

    /// Solves M(q)·q̈ + C(q, q̇)·q̇ + g(q) = τ for q̈.
    pub fn accel(&self, q: Vec2, qd: Vec2, tau: Vec2) -> Vec2 {
        let (m11, m12, m22) = self.mass_matrix(q);
        let c = self.coriolis(q, qd);
        let g = self.gravity_torque(q);
        let b = [tau[0] - c[0] - g[0], tau[1] - c[1] - g[1]];
        let det = m11 * m22 - m12 * m12;
        [
            (m22 * b[0] - m12 * b[1]) / det,
            (m11 * b[1] - m12 * b[0]) / det,
        ]
    }

    /// One classical RK4 step with `tau` held constant.
    pub fn rk4_step(&self, q: Vec2, qd: Vec2, tau: Vec2, dt: f64) -> (Vec2, Vec2) {
        let f = |q: Vec2, qd: Vec2| (qd, self.accel(q, qd, tau));
        let add = |a: Vec2, b: Vec2, s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        let (k1q, k1v) = f(q, qd);
        let (k2q, k2v) = f(add(q, k1q, dt / 2.0), add(qd, k1v, dt / 2.0));
        let (k3q, k3v) = f(add(q, k2q, dt / 2.0), add(qd, k2v, dt / 2.0));
        let (k4q, k4v) = f(add(q, k3q, dt), add(qd, k3v, dt));
        let comb = |x: Vec2, a: Vec2, b: Vec2, c: Vec2, d: Vec2| {
            [
                x[0] + dt / 6.0 * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0]),
                x[1] + dt / 6.0 * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1]),
            ]
        };
        (comb(q, k1q, k2q, k3q, k4q), comb(qd, k1v, k2v, k3v, k4v))
    }
}

/// Joint accelerations of the arm described by `params` and `constants`.
pub fn dynamics_accel(
    params: &ArmParams,
    constants: &Constants,
    q: Vec2,
    qd: Vec2,
    tau: Vec2,
) -> Vec2 {
    ArmDynamics::new(params, constants).accel(q, qd, tau)
}

/// Saturated PD torque toward `q_ref`. Returns (applied, saturated-per-joint).
pub fn pd_torque(params: &ArmParams, q_ref: Vec2, q: Vec2, qd: Vec2) -> (Vec2, [bool; 2]) {
    let raw = [
        params.kp1 * (q_ref[0] - q[0]) - params.kd1 * qd[0],
        params.kp2 * (q_ref[1] - q[1]) - params.kd2 * qd[1],
    ];
    let lim = params.torque_limits();
    (
        [raw[0].clamp(-lim[0], lim[0]), raw[1].clamp(-lim[1], lim[1])],
        [raw[0].abs() > lim[0], raw[1].abs() > lim[1]],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: Vec2,
    pub qd: Vec2,
    pub tau: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub reachable: bool,
    /// Cycle time; `t_max` when `timed_out`. `None` when unreachable.
    pub t_cyc: Option<f64>,
    pub timed_out: bool,
    /// Consumed mechanical energy ∫ Σ|τᵢ q̇ᵢ| dt. `None` when unreachable.
    pub energy: Option<f64>,
    /// Fraction of steps in which each joint's PD demand exceeded its limit.
    pub saturation_fraction: Vec2,
    pub trajectory: Vec<TrajectorySample>,
}

impl SimResult {
    fn unreachable() -> Self {
        Self {
            reachable: false,
            t_cyc: None,
            timed_out: false,
            energy: None,
            saturation_fraction: [0.0, 0.0],
            trajectory: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    /// Keep every k-th step in the trajectory; 0 records nothing.
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid arm parameters: {0}")]
    InvalidParams(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("state diverged at t = {t}")]
    Diverged { t: f64 },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Leg {
    ToPick,
    ToPlace,
}

/// Simulates one pick-and-place cycle starting at rest in the place pose.
///
/// Unreachable targets are reported through `SimResult::reachable`, not as an
/// error.
pub fn simulate_cycle(
    params: &ArmParams,
    constants: &Constants,
    task: &Task,
    options: SimOptions,
) -> Result<SimResult, SimError> {
    params.validate().map_err(SimError::InvalidParams)?;
    task.validate().map_err(SimError::InvalidTask)?;
    if reachability_check(params, constants, task) != [true, true] {
        return Ok(SimResult::unreachable());
    }
    let q_pick = inverse_kinematics(params, task.pick).expect("checked reachable");
    let q_place = inverse_kinematics(params, task.place).expect("checked reachable");

    let dynamics = ArmDynamics::new(params, constants);
    let dt = constants.dt;
    let max_steps = (task.t_max / dt).round() as usize;
    let hold_steps = (task.t_hold / dt).round() as usize;

    let mut q = q_place;
    let mut qd = [0.0, 0.0];
    let mut energy = 0.0;
    let mut leg = Leg::ToPick;
    let mut held = 0usize;
    let mut saturated = [0usize; 2];
    let mut trajectory = Vec::new();
    if options.record_every > 0 {
        trajectory.push(TrajectorySample {
            t: 0.0,
            q,
            qd,
            tau: [0.0, 0.0],
        });
    }

    for step in 1..=max_steps {
        let (q_ref, target) = match leg {
            Leg::ToPick => (q_pick, task.pick),
            Leg::ToPlace => (q_place, task.place),
        };
        let (tau, sat) = pd_torque(params, q_ref, q, qd);
        for j in 0..2 {
            saturated[j] += usize::from(sat[j]);
        }
        let p0 = (tau[0] * qd[0]).abs() + (tau[1] * qd[1]).abs();
        let (q1, qd1) = dynamics.rk4_step(q, qd, tau, dt);
        let p1 = (tau[0] * qd1[0]).abs() + (tau[1] * qd1[1]).abs();
        energy += 0.5 * dt * (p0 + p1);
        q = q1;
        qd = qd1;
        let t = step as f64 * dt;
        if !(q.iter().chain(qd.iter()).all(|v| v.is_finite()) && energy.is_finite()) {
            return Err(SimError::Diverged { t });
        }
        if options.record_every > 0 && step % options.record_every == 0 {
            trajectory.push(TrajectorySample { t, q, qd, tau });
        }

        let ee = forward_kinematics(params, q);
        let close = (ee[0] - target[0]).hypot(ee[1] - target[1]) <= task.eps_pos;
        let still = qd[0].abs().max(qd[1].abs()) <= task.omega_tol;
        if close && still {
            held += 1;
        } else {
            held = 0;
        }
        // The first qualifying sample starts the hold window.
        if close && still && held > hold_steps {
            match leg {
                Leg::ToPick => {
                    leg = Leg::ToPlace;
                    held = 0;
                }
                Leg::ToPlace => {
                    return Ok(SimResult {
                        reachable: true,
                        t_cyc: Some(t),
                        timed_out: false,
                        energy: Some(energy),
                        saturation_fraction: saturation(saturated, step),
                        trajectory,
                    });
                }
            }
        }
    }
    Ok(SimResult {
        reachable: true,
        t_cyc: Some(task.t_max),
        timed_out: true,
        energy: Some(energy),
        saturation_fraction: saturation(saturated, max_steps),
        trajectory,
    })
}

fn saturation(counts: [usize; 2], steps: usize) -> Vec2 {
    let n = steps.max(1) as f64;
    [counts[0] as f64 / n, counts[1] as f64 / n]
}

/// Trajectory as CSV with header `t,q1,q2,qd1,qd2,tau1,tau2`.
pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    let mut out = String::from("t,q1,q2,qd1,qd2,tau1,tau2\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.t, s.q[0], s.q[1], s.qd[0], s.qd[1], s.tau[0], s.tau[1]
        );
    }
    out
}

/// Installs the `arm_cycle` mapping: ten parents in [`ARM_CYCLE_INPUTS`]
/// order, output `[t_cyc, L]`.
pub fn register_arm_mappings(registry: &mut MappingRegistry, task: Task, constants: Constants) {
    registry.register(
        ARM_CYCLE_MAPPING,
        Arity::Exactly(ARM_CYCLE_INPUTS.len()),
        Arc::new(move |args: &[&[f64]]| {
            let v: Vec<f64> = args.iter().map(|a| a[0]).collect();
            let params = ArmParams::from_slice(&v);
            let res = simulate_cycle(&params, &constants, &task, SimOptions::default())
                .map_err(|e| DomainError::SimulationFailed(e.to_string()))?;
            if !res.reachable {
                let [reach_pick, _] = reachability_check(&params, &constants, &task);
                let target = if reach_pick { task.place } else { task.pick };
                return Err(DomainError::Unreachable { target });
            }
            Ok(MappingOutput {
                values: vec![res.t_cyc.expect("reachable"), res.energy.expect("reachable")],
                timed_out: res.timed_out,
            })
        }),
    );
}
