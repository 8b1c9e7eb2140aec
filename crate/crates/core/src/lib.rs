//! Contact surface selection for legged locomotion.
//!
//! The crate plans a sequence of footstep contacts over a set of convex,
//! quasi-flat candidate surfaces. The mixed-integer surface assignment is
//! relaxed into a single linear program whose L1 objective drives the
//! per-surface slack variables towards a sparse solution; the selection is
//! then fixed and re-solved exactly. A big-M branch-and-bound baseline and a
//! brute-force enumeration oracle share the same constraint assembly and the
//! embedded simplex solver.
//!
//! The crate is `no_std` (it needs `alloc`). Enabling the `std` feature adds
//! wall-clock timing of solves and `std::error::Error` impls.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod clock;
mod error;

pub mod geometry;
pub mod lp;
pub mod mi;
pub mod models;
pub mod oracle;
pub mod plan;
pub mod problem;
pub mod sl1m;
pub mod validate;

pub use error::{Error, Result};
pub use geometry::{Aabb, Mat3, Polytope, Surface, Vec3};
pub use plan::{PhasePlan, Plan, PlanStatus, SolveStats, SolverKind};
pub use problem::{
    BuildOptions, EffectorModel, FixedObjective, GoalKind, GoalSpec, InitialSpec, PhaseSpec, ProblemInstance,
    RelativeIndexing,
};
