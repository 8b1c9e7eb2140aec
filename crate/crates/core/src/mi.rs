//! Mixed-integer baseline: depth-first branch-and-bound over the big-M
//! program, one binary per candidate surface.

use alloc::vec::Vec;

use crate::clock::Stopwatch;
use crate::lp::{solve_warm, Basis, LpProblem, LpSolution, LpStatus, SolveOptions};
use crate::plan::{Plan, PlanStatus, SolveStats, SolverKind};
use crate::problem::{build_fixed, build_mi, default_big_m, ProblemInstance, VariableLayout};
use crate::sl1m::final_objective;
use crate::Result;

pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiOptions {
    /// Big-M constant; `None` takes the instance option, then the default.
    pub big_m: Option<f64>,
    pub node_limit: usize,
    /// Wall-clock limit in seconds (ignored without the `std` feature).
    pub time_limit: Option<f64>,
    pub lp: SolveOptions,
}

impl Default for MiOptions {
    fn default() -> Self {
        MiOptions { big_m: None, node_limit: 100_000, time_limit: None, lp: SolveOptions::default() }
    }
}

/// One evaluated node of the search tree.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub parent: Option<usize>,
    pub depth: usize,
    /// Binary fixings along the path from the root, as `(variable, value)`.
    pub fixed: Vec<(usize, u8)>,
    /// LP bound, `None` when the node LP is infeasible.
    pub bound: Option<f64>,
}

pub fn solve_mi(inst: &ProblemInstance, opts: &MiOptions) -> Result<Plan> {
    solve_mi_traced(inst, opts).map(|(plan, _)| plan)
}

/// Like [`solve_mi`], also returning every evaluated node in evaluation order.
pub fn solve_mi_traced(inst: &ProblemInstance, opts: &MiOptions) -> Result<(Plan, Vec<NodeRecord>)> {
    let clock = Stopwatch::start();
    let big_m = opts.big_m.or(inst.build.big_m).unwrap_or_else(|| default_big_m(inst));
    let model = build_mi(inst, big_m)?;
    let mut search = Search {
        lp: model.lp.clone(),
        layout: &model.layout,
        opts,
        stats: SolveStats::default(),
        trace: Vec::new(),
        clock,
        feasibility_only: model.lp.cost.iter().all(|&c| c == 0.0),
    };
    let outcome = search.run()?;
    let mut stats = search.stats;
    let trace = search.trace;
    let plan = match outcome {
        Outcome::Found(pick) => {
            let fixed = build_fixed(inst, &pick, final_objective(inst))?;
            let s = solve_warm(&fixed.lp, &opts.lp, None)?;
            stats.record(&s);
            stats.solve_time = clock.elapsed_secs();
            if s.status == LpStatus::Optimal {
                Plan::from_fixed(SolverKind::Mi, PlanStatus::Feasible, &fixed, &s.x, stats)
            } else {
                Plan::without_solution(SolverKind::Mi, PlanStatus::Incomplete, stats)
            }
        }
        Outcome::Exhausted => {
            stats.solve_time = clock.elapsed_secs();
            Plan::without_solution(SolverKind::Mi, PlanStatus::Infeasible, stats)
        }
        Outcome::Limit => {
            stats.solve_time = clock.elapsed_secs();
            Plan::without_solution(SolverKind::Mi, PlanStatus::Incomplete, stats)
        }
    };
    Ok((plan, trace))
}

enum Outcome {
    Found(Vec<usize>),
    Exhausted,
    Limit,
}

struct Search<'a> {
    lp: LpProblem,
    layout: &'a VariableLayout,
    opts: &'a MiOptions,
    stats: SolveStats,
    trace: Vec<NodeRecord>,
    clock: Stopwatch,
    feasibility_only: bool,
}

/// An evaluated node waiting on the stack.
struct Node {
    id: usize,
    depth: usize,
    fixed: Vec<(usize, u8)>,
    sol: LpSolution,
}

impl Search<'_> {
    fn evaluate(
        &mut self,
        parent: Option<usize>,
        depth: usize,
        fixed: Vec<(usize, u8)>,
        warm: Option<&Basis>,
    ) -> Result<Option<Node>> {
        let mut lp = self.lp.clone();
        for &(j, v) in &fixed {
            lp.set_bounds(j, v as f64, v as f64);
        }
        let sol = solve_warm(&lp, &self.opts.lp, warm)?;
        self.stats.record(&sol);
        self.stats.nodes += 1;
        let id = self.trace.len();
        let feasible = sol.status == LpStatus::Optimal;
        self.trace.push(NodeRecord { parent, depth, fixed: fixed.clone(), bound: feasible.then_some(sol.objective) });
        Ok(feasible.then_some(Node { id, depth, fixed, sol }))
    }

    fn out_of_budget(&self) -> bool {
        self.stats.nodes >= self.opts.node_limit || self.opts.time_limit.is_some_and(|t| self.clock.elapsed_secs() > t)
    }

    /// Most fractional binary as `(phase, variable)`; ties go to the lowest
    /// phase, then the lowest surface id. `None` when integral.
    fn branching_variable(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for (p, range) in self.layout.binary.iter().enumerate() {
            for (idx, j) in range.clone().enumerate() {
                let frac = (x[j] - libm::round(x[j])).abs();
                if frac <= INTEGRALITY_TOL {
                    continue;
                }
                let key = ((x[j] - 0.5).abs(), p, self.layout.candidates[p][idx], j);
                if best.map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                    best = Some(key);
                }
            }
        }
        best.map(|b| b.3)
    }

    fn assignment(&self, x: &[f64]) -> Vec<usize> {
        self.layout
            .binary
            .iter()
            .zip(&self.layout.candidates)
            .map(|(range, cands)| {
                let best = range.clone().enumerate().max_by(|a, b| x[a.1].total_cmp(&x[b.1])).unwrap();
                cands[best.0]
            })
            .collect()
    }

    fn run(&mut self) -> Result<Outcome> {
        let Some(root) = self.evaluate(None, 0, Vec::new(), None)? else {
            return Ok(Outcome::Exhausted);
        };
        let mut stack = alloc::vec![root];
        let mut incumbent: Option<(f64, Vec<usize>)> = None;
        let mut hit_limit = false;
        while let Some(node) = stack.pop() {
            if let Some((best, _)) = &incumbent {
                if node.sol.objective >= best - 1e-9 {
                    continue;
                }
            }
            let Some(j) = self.branching_variable(&node.sol.x) else {
                let pick = self.assignment(&node.sol.x);
                if self.feasibility_only {
                    return Ok(Outcome::Found(pick));
                }
                incumbent = Some((node.sol.objective, pick));
                continue;
            };
            if self.out_of_budget() {
                hit_limit = true;
                break;
            }
            let mut children = Vec::with_capacity(2);
            for v in [1u8, 0u8] {
                let mut fixed = node.fixed.clone();
                fixed.push((j, v));
                let basis = node.sol.basis.as_ref();
                if let Some(child) = self.evaluate(Some(node.id), node.depth + 1, fixed, basis)? {
                    children.push(child);
                }
            }
            // Better bound explored first; the stack pops the last entry, and
            // the stable sort keeps y = 1 ahead on ties.
            children.sort_by(|a, b| a.sol.objective.total_cmp(&b.sol.objective));
            stack.extend(children.into_iter().rev());
        }
        Ok(match (incumbent, hit_limit) {
            (Some((_, pick)), false) => Outcome::Found(pick),
            (_, true) => Outcome::Limit,
            (None, false) => Outcome::Exhausted,
        })
    }
}
