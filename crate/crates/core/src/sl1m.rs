//! The L1 relaxation pipeline: solve the relaxation, read off the surface
//! each phase selected, fix it, and enumerate assignments when the
//! relaxation is not sparse enough.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::clock::Stopwatch;
use crate::lp::{solve, LpStatus, SolveOptions};
use crate::plan::{Plan, PlanStatus, SolveStats, SolverKind};
use crate::problem::{build_fixed, build_sl1m, FixedObjective, LinearTerm, ProblemInstance, VariableLayout};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl1mOptions {
    /// Slack value under which a surface counts as selected.
    pub tol_zero: f64,
    /// Largest number of assignments the fallback may enumerate.
    pub max_combinations: usize,
    pub stop_at_first_feasible: bool,
    pub lp: SolveOptions,
}

impl Default for Sl1mOptions {
    fn default() -> Self {
        Sl1mOptions {
            tol_zero: 1e-6,
            max_combinations: 4000,
            stop_at_first_feasible: true,
            lp: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSparsity {
    /// `(surface, alpha)` sorted by alpha, then surface id.
    pub sorted: Vec<(usize, f64)>,
    pub resolved: bool,
    pub selected: Option<usize>,
    /// More than one alpha fell under the tolerance.
    pub tie: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsityReport {
    pub phases: Vec<PhaseSparsity>,
}

impl SparsityReport {
    pub fn resolved_count(&self) -> usize {
        self.phases.iter().filter(|p| p.resolved).count()
    }

    pub fn unresolved(&self) -> Vec<usize> {
        (0..self.phases.len()).filter(|&i| !self.phases[i].resolved).collect()
    }
}

/// Reads the slacks of a relaxation solution. Negative round-off is clamped
/// to zero. A phase is resolved when its smallest alpha is within
/// `tol_zero`; ties go to the smallest alpha, then the lowest surface id.
pub fn classify_sparsity(x: &[f64], layout: &VariableLayout, tol_zero: f64) -> SparsityReport {
    let phases = (1..=layout.n_phases)
        .map(|k| {
            let mut sorted: Vec<(usize, f64)> = layout.alphas(x, k).into_iter().map(|(s, a)| (s, a.max(0.0))).collect();
            sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let under = sorted.iter().filter(|(_, a)| *a <= tol_zero).count();
            PhaseSparsity { resolved: under >= 1, selected: (under >= 1).then(|| sorted[0].0), tie: under > 1, sorted }
        })
        .collect();
    SparsityReport { phases }
}

/// Objective of the final fixed solve: centring, or the goal distance when
/// the instance asks for it.
pub fn final_objective(inst: &ProblemInstance) -> FixedObjective {
    match inst.linear_term {
        Some(LinearTerm::GoalDistance) => FixedObjective::GoalDistance,
        None => FixedObjective::Centering,
    }
}

pub fn solve_sl1m(inst: &ProblemInstance, opts: &Sl1mOptions) -> Result<Plan> {
    let clock = Stopwatch::start();
    let mut stats = SolveStats::default();
    let mut plan = run(inst, opts, &mut stats)?;
    plan.stats.solve_time = clock.elapsed_secs();
    Ok(plan)
}

fn run(inst: &ProblemInstance, opts: &Sl1mOptions, stats: &mut SolveStats) -> Result<Plan> {
    let relax = build_sl1m(inst)?;
    let sol = solve(&relax.lp, &opts.lp)?;
    stats.record(&sol);
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::IterationLimit => {
            return Ok(Plan::without_solution(SolverKind::Sl1m, PlanStatus::Incomplete, stats.clone()))
        }
        _ => return Ok(Plan::without_solution(SolverKind::Sl1m, PlanStatus::Infeasible, stats.clone())),
    }
    let report = classify_sparsity(&sol.x, &relax.layout, opts.tol_zero);
    let alphas: Vec<Vec<(usize, f64)>> = report.phases.iter().map(|p| p.sorted.clone()).collect();
    let with_alphas = |mut p: Plan| {
        p.alphas = alphas.clone();
        p
    };
    let mut unresolved = report.unresolved();
    stats.unresolved_phases = unresolved.len();
    // Candidates per phase, best first.
    let ranked: Vec<Vec<usize>> = report.phases.iter().map(|p| p.sorted.iter().map(|&(s, _)| s).collect()).collect();
    let scores: Vec<Vec<f64>> = report.phases.iter().map(|p| p.sorted.iter().map(|&(_, a)| a).collect()).collect();
    let objective = final_objective(inst);

    if unresolved.is_empty() {
        let pick: Vec<usize> = ranked.iter().map(|r| r[0]).collect();
        if let Some(plan) = fixed_plan(inst, &pick, objective, PlanStatus::SparseDirect, opts, stats)? {
            return Ok(with_alphas(plan));
        }
        // A tie went the wrong way: reopen the tied phases.
        unresolved = (0..report.phases.len()).filter(|&i| report.phases[i].tie).collect();
    }

    // Stage one varies the unresolved phases only; stage two varies every
    // phase, so an instance with any feasible assignment is never reported
    // infeasible.
    let all: Vec<usize> = (0..ranked.len()).collect();
    let stages = if unresolved.len() == all.len() { vec![all] } else { vec![unresolved, all] };
    let mut tried: BTreeSet<Vec<usize>> = BTreeSet::new();
    for free in stages {
        if free.is_empty() {
            continue;
        }
        let space = free.iter().fold(1u128, |acc, &k| acc.saturating_mul(ranked[k].len() as u128));
        if space > opts.max_combinations as u128 {
            return Ok(with_alphas(Plan::without_solution(
                SolverKind::Sl1m,
                PlanStatus::CombinatorialExhausted,
                stats.clone(),
            )));
        }
        let lists: Vec<&[f64]> = free.iter().map(|&k| scores[k].as_slice()).collect();
        let mut found: Option<Vec<usize>> = None;
        for idx in AscendingSums::new(&lists) {
            let mut pick: Vec<usize> = ranked.iter().map(|r| r[0]).collect();
            for (&k, &i) in free.iter().zip(&idx) {
                pick[k] = ranked[k][i];
            }
            if !tried.insert(pick.clone()) {
                continue;
            }
            stats.combinations_tried += 1;
            let fixed = build_fixed(inst, &pick, FixedObjective::Feasibility)?;
            let s = solve(&fixed.lp, &opts.lp)?;
            stats.record(&s);
            if s.status == LpStatus::Optimal && found.is_none() {
                found = Some(pick);
                if opts.stop_at_first_feasible {
                    break;
                }
            }
        }
        if let Some(pick) = found {
            if let Some(plan) = fixed_plan(inst, &pick, objective, PlanStatus::FixedAfterFallback, opts, stats)? {
                return Ok(with_alphas(plan));
            }
        }
    }
    Ok(with_alphas(Plan::without_solution(SolverKind::Sl1m, PlanStatus::Infeasible, stats.clone())))
}

/// Solves the fixed program; `None` when it is not optimal.
fn fixed_plan(
    inst: &ProblemInstance,
    pick: &[usize],
    objective: FixedObjective,
    status: PlanStatus,
    opts: &Sl1mOptions,
    stats: &mut SolveStats,
) -> Result<Option<Plan>> {
    let fixed = build_fixed(inst, pick, objective)?;
    let s = solve(&fixed.lp, &opts.lp)?;
    stats.record(&s);
    Ok((s.status == LpStatus::Optimal).then(|| Plan::from_fixed(SolverKind::Sl1m, status, &fixed, &s.x, stats.clone())))
}

/// Re-solves a fixed assignment with the L1 centring objective.
pub fn refine(inst: &ProblemInstance, assignment: &[usize]) -> Result<Plan> {
    let clock = Stopwatch::start();
    let mut stats = SolveStats::default();
    let fixed = build_fixed(inst, assignment, FixedObjective::Centering)?;
    let s = solve(&fixed.lp, &SolveOptions::default())?;
    stats.record(&s);
    stats.solve_time = clock.elapsed_secs();
    Ok(if s.status == LpStatus::Optimal {
        Plan::from_fixed(SolverKind::Sl1m, PlanStatus::Feasible, &fixed, &s.x, stats)
    } else {
        Plan::without_solution(SolverKind::Sl1m, PlanStatus::Infeasible, stats)
    })
}

/// Index tuples over sorted score lists, in ascending order of total score
/// (ties broken lexicographically). Each tuple has a unique parent, obtained
/// by decrementing its last nonzero index, so a heap visits every tuple once.
pub struct AscendingSums<'a> {
    lists: &'a [&'a [f64]],
    heap: BinaryHeap<Reverse<Entry>>,
}

#[derive(Clone, Debug)]
struct Entry {
    sum: f64,
    idx: Vec<usize>,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.sum.total_cmp(&o.sum).then_with(|| self.idx.cmp(&o.idx))
    }
}

impl<'a> AscendingSums<'a> {
    pub fn new(lists: &'a [&'a [f64]]) -> Self {
        let mut heap = BinaryHeap::new();
        if lists.iter().all(|l| !l.is_empty()) {
            let idx = vec![0; lists.len()];
            heap.push(Reverse(Entry { sum: lists.iter().map(|l| l[0]).sum(), idx }));
        }
        AscendingSums { lists, heap }
    }
}

impl Iterator for AscendingSums<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let Reverse(e) = self.heap.pop()?;
        let last = e.idx.iter().rposition(|&i| i > 0).unwrap_or(0);
        for j in last..e.idx.len() {
            if e.idx[j] + 1 < self.lists[j].len() {
                let mut idx = e.idx.clone();
                idx[j] += 1;
                let sum = idx.iter().zip(self.lists).map(|(&i, l)| l[i]).sum();
                self.heap.push(Reverse(Entry { sum, idx }));
            }
        }
        Some(e.idx)
    }
}
