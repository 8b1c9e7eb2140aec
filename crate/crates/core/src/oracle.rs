//! Brute-force reference: test every assignment for feasibility.

use alloc::vec;
use alloc::vec::Vec;

use crate::clock::Stopwatch;
use crate::lp::{check_feasible, solve, LpStatus, SolveOptions};
use crate::plan::{Plan, PlanStatus, SolveStats, SolverKind};
use crate::problem::{build_fixed, FixedObjective, ProblemInstance};
use crate::sl1m::final_objective;
use crate::{Error, Result};

pub const DEFAULT_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    /// Feasible assignments in lexicographic order of surface ids.
    pub assignments: Vec<Vec<usize>>,
    /// The cap cut the enumeration short; `assignments` is partial.
    pub exhausted: bool,
    /// Number of assignments tested.
    pub tested: usize,
}

impl Enumeration {
    /// Fails with `CapExceeded` when the enumeration was cut short.
    pub fn complete(self, inst: &ProblemInstance, cap: usize) -> Result<Self> {
        if self.exhausted {
            Err(Error::CapExceeded { combinations: inst.combinations(), cap })
        } else {
            Ok(self)
        }
    }

    pub fn any_feasible(&self) -> bool {
        !self.assignments.is_empty()
    }
}

/// Every assignment in lexicographic order of surface ids, last phase fastest.
pub struct Assignments {
    sorted: Vec<Vec<usize>>,
    idx: Option<Vec<usize>>,
}

impl Assignments {
    pub fn new(inst: &ProblemInstance) -> Self {
        let sorted: Vec<Vec<usize>> = inst
            .phases
            .iter()
            .map(|p| {
                let mut c = p.candidates.clone();
                c.sort_unstable();
                c
            })
            .collect();
        let idx = sorted.iter().all(|c| !c.is_empty()).then(|| vec![0; sorted.len()]);
        Assignments { sorted, idx }
    }
}

impl Iterator for Assignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let idx = self.idx.as_mut()?;
        let out = idx.iter().zip(&self.sorted).map(|(&i, c)| c[i]).collect();
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                self.idx = None;
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < self.sorted[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
        Some(out)
    }
}

fn feasible(inst: &ProblemInstance, pick: &[usize]) -> Result<bool> {
    let fixed = build_fixed(inst, pick, FixedObjective::Feasibility)?;
    Ok(check_feasible(&fixed.lp)?.feasible)
}

/// Tests up to `cap` assignments and returns the feasible ones.
pub fn enumerate_feasible(inst: &ProblemInstance, cap: usize) -> Result<Enumeration> {
    inst.check()?;
    let mut out = Enumeration { assignments: Vec::new(), exhausted: false, tested: 0 };
    for pick in Assignments::new(inst) {
        if out.tested == cap {
            out.exhausted = true;
            break;
        }
        out.tested += 1;
        if feasible(inst, &pick)? {
            out.assignments.push(pick);
        }
    }
    Ok(out)
}

/// Plan from the first feasible assignment in lexicographic order.
pub fn solve_oracle(inst: &ProblemInstance, cap: usize) -> Result<Plan> {
    let clock = Stopwatch::start();
    inst.check()?;
    let mut stats = SolveStats::default();
    for pick in Assignments::new(inst) {
        if stats.combinations_tried == cap {
            stats.solve_time = clock.elapsed_secs();
            return Ok(Plan::without_solution(SolverKind::Oracle, PlanStatus::CombinatorialExhausted, stats));
        }
        stats.combinations_tried += 1;
        stats.lp_solves += 1;
        if feasible(inst, &pick)? {
            let fixed = build_fixed(inst, &pick, final_objective(inst))?;
            let s = solve(&fixed.lp, &SolveOptions::default())?;
            stats.record(&s);
            stats.solve_time = clock.elapsed_secs();
            if s.status == LpStatus::Optimal {
                return Ok(Plan::from_fixed(SolverKind::Oracle, PlanStatus::Feasible, &fixed, &s.x, stats));
            }
        }
    }
    stats.solve_time = clock.elapsed_secs();
    Ok(Plan::without_solution(SolverKind::Oracle, PlanStatus::Infeasible, stats))
}
