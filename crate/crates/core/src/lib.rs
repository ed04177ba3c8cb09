//! # solspace
//!
//! Solution spaces for robot co-design: the largest axis-aligned box of
//! design-variable ranges whose designs all meet system-level requirements.
//!
//! The workflow mirrors a top-down design process:
//!
//! 1. Describe design variables, an attribute dependency graph and
//!    requirements in a [`problem::ProblemFile`].
//! 2. Obtain a baseline design with [`baseline::optimize_baseline`] (or give
//!    one literally) and turn its performance into requirements with
//!    [`baseline::derive_requirements`].
//! 3. Compute the solution box with [`boxsolver::solve_box`], check it with
//!    [`boxsolver::validate_box`] and trade ranges between variables with
//!    [`boxsolver::restrict_and_resolve`].
//! 4. Inspect the result through design sections ([`sections`]) and persist
//!    it as a run directory ([`run`]).
//!
//! The [`robot`] module provides the planar two-link pick-and-place arm used
//! as the demonstration problem (`problems/arm.json`).
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adg;
pub mod baseline;
pub mod boxsolver;
pub mod problem;
pub mod robot;
pub mod run;
pub mod sections;

pub use adg::{
    classify, validate_adg, Adg, Classification, Comparator, DesignPoint, DesignVariable, DvKind,
    QoiValues, Requirement,
};
pub use baseline::{derive_requirements, optimize_baseline, scalarize, BaselineResult};
pub use boxsolver::{mu, restrict_and_resolve, solve_box, validate_box, DesignBox, SolverParams, SolverTrace};
pub use problem::{Problem, ProblemError, ProblemFile};
pub use sections::{export_section, make_section, ExportFormat, SectionData, Span};

/// The shipped pick-and-place arm problem.
pub const ARM_PROBLEM: &str = include_str!("../problems/arm.json");
