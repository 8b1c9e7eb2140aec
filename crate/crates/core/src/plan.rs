//! Solver output shared by every planner.

use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::problem::Assembled;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Sl1m,
    Mi,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanStatus {
    /// Every phase was resolved by the relaxation alone.
    SparseDirect,
    /// Found by enumerating assignments after the relaxation.
    FixedAfterFallback,
    /// Found by a solver without a relaxation stage.
    Feasible,
    Infeasible,
    /// The enumeration cap was reached before a feasible assignment.
    CombinatorialExhausted,
    /// A node, time or iteration limit stopped the search.
    Incomplete,
}

impl PlanStatus {
    pub fn is_feasible(self) -> bool {
        matches!(self, PlanStatus::SparseDirect | PlanStatus::FixedAfterFallback | PlanStatus::Feasible)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePlan {
    pub surface: usize,
    /// Landing position `p^k` of the moving foot.
    pub foot: Vec3,
    /// COM at the start and end of the phase.
    pub com: [Vec3; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub lp_solves: usize,
    pub simplex_iterations: usize,
    /// Assignments tried after the relaxation, or enumerated by the oracle.
    pub combinations_tried: usize,
    /// Branch-and-bound nodes evaluated.
    pub nodes: usize,
    /// Some LP stopped at its iteration limit.
    pub iteration_limit_hit: bool,
    /// Phases the relaxation left unresolved.
    pub unresolved_phases: usize,
    /// Wall time in seconds (zero without the `std` feature).
    pub solve_time: f64,
}

impl SolveStats {
    pub(crate) fn record(&mut self, sol: &crate::lp::LpSolution) {
        self.lp_solves += 1;
        self.simplex_iterations += sol.iterations;
        self.iteration_limit_hit |= sol.status == crate::lp::LpStatus::IterationLimit;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub solver: SolverKind,
    pub status: PlanStatus,
    /// One entry per phase when feasible, empty otherwise.
    pub phases: Vec<PhasePlan>,
    /// Relaxation slacks per phase as `(surface, alpha)`, sorted by alpha;
    /// empty for solvers without a relaxation.
    pub alphas: Vec<Vec<(usize, f64)>>,
    pub stats: SolveStats,
}

impl Plan {
    pub fn without_solution(solver: SolverKind, status: PlanStatus, stats: SolveStats) -> Plan {
        Plan { solver, status, phases: Vec::new(), alphas: Vec::new(), stats }
    }

    /// Reads feet and COM points of a fixed-assignment solution.
    pub fn from_fixed(solver: SolverKind, status: PlanStatus, fixed: &Assembled, x: &[f64], stats: SolveStats) -> Plan {
        let layout = &fixed.layout;
        let phases = (1..=layout.n_phases)
            .map(|k| PhasePlan {
                surface: layout.candidates[k - 1][0],
                foot: layout.foot_value(x, k),
                com: [layout.com_value(x, k, 0), layout.com_value(x, k, 1)],
            })
            .collect();
        Plan { solver, status, phases, alphas: Vec::new(), stats }
    }

    pub fn assignment(&self) -> Vec<usize> {
        self.phases.iter().map(|p| p.surface).collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.status.is_feasible()
    }

    /// COM polyline `c^{1,0}, c^{1,1}, c^{2,0}, ...`.
    pub fn com_polyline(&self) -> Vec<Vec3> {
        self.phases.iter().flat_map(|p| p.com).collect()
    }
}
