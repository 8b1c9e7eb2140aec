//! Independent check of a plan against the fixed-assignment constraints.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{rotate_polytope, Vec3};
use crate::plan::Plan;
use crate::problem::{build_fixed, FixedObjective, ProblemInstance, RowKind, RowTag};

pub const VALIDATION_TOL: f64 = 1e-6;
/// Interior sample points per COM segment.
pub const SEGMENT_SAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub tag: RowTag,
    /// Amount by which the row is violated (infinite for structural faults).
    pub residual: f64,
    /// Position along a COM segment for polyline samples.
    pub sample: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> f64 {
        self.violations.iter().map(|v| v.residual).fold(0.0, f64::max)
    }
}

pub fn validate(inst: &ProblemInstance, plan: &Plan) -> ValidationReport {
    validate_with_tol(inst, plan, VALIDATION_TOL)
}

/// Evaluates every fixed-assignment row at the plan's points, then samples
/// the COM polyline: each double-support segment `[c^{k,0}, c^{k,1}]` against
/// the reachability of both feet, and each single-support segment
/// `[c^{k,1}, c^{k+1,0}]` against the sole and reachability of foot `k`.
pub fn validate_with_tol(inst: &ProblemInstance, plan: &Plan, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let structural = |kind, phase| Violation {
        tag: RowTag { kind, phase, contact: phase, surface: None },
        residual: f64::INFINITY,
        sample: None,
    };
    if plan.phases.len() != inst.n_phases() {
        report.violations.push(structural(RowKind::Selection, 0));
        return report;
    }
    let fixed = match build_fixed(inst, &plan.assignment(), FixedObjective::Feasibility) {
        Ok(f) => f,
        Err(_) => {
            report.violations.push(structural(RowKind::Selection, 0));
            return report;
        }
    };
    let layout = &fixed.layout;
    let mut x = vec![0.0; layout.n_vars];
    for (k0, ph) in plan.phases.iter().enumerate() {
        let k = k0 + 1;
        write3(&mut x, layout.foot(k), ph.foot);
        write3(&mut x, layout.com(k, 0), ph.com[0]);
        write3(&mut x, layout.com(k, 1), ph.com[1]);
    }
    let lp = &fixed.lp;
    for i in 0..lp.ineq.len() {
        let r = lp.ineq.dot(i, &x) - lp.ineq_rhs[i];
        if !(r <= tol) {
            report.violations.push(Violation { tag: fixed.ineq_tags[i], residual: r, sample: None });
        }
    }
    for i in 0..lp.eq.len() {
        let r = (lp.eq.dot(i, &x) - lp.eq_rhs[i]).abs();
        if !(r <= tol) {
            report.violations.push(Violation { tag: fixed.eq_tags[i], residual: r, sample: None });
        }
    }

    let n = inst.n_phases();
    let assignment = plan.assignment();
    let surface_of = |l: usize| {
        if l == 0 {
            inst.initial_surface().unwrap_or(0)
        } else {
            assignment[l - 1]
        }
    };
    let foot_at = |l: usize| if l == 0 { inst.initial.position } else { plan.phases[l - 1].foot };
    let mut check = |kind: RowKind, phase: usize, l: usize, t: f64, q: Vec3| {
        let eff = &inst.effectors[inst.effector_at(l)];
        let s = surface_of(l);
        let poly = match kind {
            RowKind::Equilibrium => rotate_polytope(&eff.foot, inst.yaw_at(l)),
            _ => eff.com.transformed(&inst.surfaces[s].frame(inst.yaw_at(l))),
        };
        let r = poly.max_violation(q - foot_at(l));
        if !(r <= tol) {
            report.violations.push(Violation {
                tag: RowTag { kind, phase, contact: l, surface: Some(s) },
                residual: r,
                sample: Some(t),
            });
        }
    };
    for k in 1..=n {
        let [c0, c1] = plan.phases[k - 1].com;
        for t in samples() {
            let q = c0.lerp(c1, t);
            check(RowKind::ComReach, k, k - 1, t, q);
            check(RowKind::ComReach, k, k, t, q);
        }
        if k < n {
            let next = plan.phases[k].com[0];
            for t in samples() {
                let q = c1.lerp(next, t);
                check(RowKind::Equilibrium, k, k, t, q);
                check(RowKind::ComReach, k, k, t, q);
            }
        }
    }
    report
}

fn samples() -> impl Iterator<Item = f64> {
    (1..=SEGMENT_SAMPLES).map(|i| i as f64 / (SEGMENT_SAMPLES + 1) as f64)
}

fn write3(x: &mut [f64], at: usize, v: Vec3) {
    x[at] = v.x;
    x[at + 1] = v.y;
    x[at + 2] = v.z;
}
