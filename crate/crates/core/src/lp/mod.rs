//! Linear programs and the simplex solver behind every planner in the crate.
//!
//! Problems are stated in the natural inequality form
//! `min c^T x  s.t.  G x <= h,  A x = b,  l <= x <= u`. The planner's
//! programs have far more rows than columns, so [`solve`] runs the revised
//! simplex on the dual standard form, whose basis is only `n x n`; the primal
//! point is read back from the simplex multipliers.

mod dump;
mod lu;
mod simplex;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::clock::Stopwatch;
use crate::{Error, Result};

pub use dump::dump_text;

/// Compressed sparse rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRows {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl SparseRows {
    pub fn new() -> Self {
        SparseRows { ptr: vec![0], idx: Vec::new(), val: Vec::new() }
    }

    /// Appends a row; zero coefficients are dropped and repeated columns summed.
    pub fn push(&mut self, entries: &[(usize, f64)]) {
        let start = self.idx.len();
        for &(j, v) in entries {
            if v == 0.0 {
                continue;
            }
            if let Some(k) = self.idx[start..].iter().position(|&c| c == j) {
                self.val[start + k] += v;
            } else {
                self.idx.push(j);
                self.val.push(v);
            }
        }
        self.ptr.push(self.idx.len());
    }

    pub fn len(&self) -> usize {
        self.ptr.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.ptr[i], self.ptr[i + 1]);
        (&self.idx[a..b], &self.val[a..b])
    }

    pub fn dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum()
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    /// Multiplies row `i` by `s`.
    pub fn scale_row(&mut self, i: usize, s: f64) {
        let (a, b) = (self.ptr[i], self.ptr[i + 1]);
        self.val[a..b].iter_mut().for_each(|v| *v *= s);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub n_vars: usize,
    pub cost: Vec<f64>,
    /// Rows of `G x <= h`.
    pub ineq: SparseRows,
    pub ineq_rhs: Vec<f64>,
    /// Rows of `A x = b`.
    pub eq: SparseRows,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// `n_vars` free variables, zero cost, no rows.
    pub fn new(n_vars: usize) -> Self {
        LpProblem {
            n_vars,
            cost: vec![0.0; n_vars],
            ineq: SparseRows::new(),
            ineq_rhs: Vec::new(),
            eq: SparseRows::new(),
            eq_rhs: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn add_le(&mut self, row: &[(usize, f64)], rhs: f64) {
        self.ineq.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_eq(&mut self, row: &[(usize, f64)], rhs: f64) {
        self.eq.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n_vars;
        let bad = |msg: &str| Err(Error::MalformedProblem(msg.into()));
        if self.cost.len() != n || self.lower.len() != n || self.upper.len() != n {
            return bad("vector lengths differ from n_vars");
        }
        if self.ineq.len() != self.ineq_rhs.len() || self.eq.len() != self.eq_rhs.len() {
            return bad("row count differs from rhs length");
        }
        if self.cost.iter().any(|v| !v.is_finite()) {
            return bad("non-finite cost");
        }
        if self.ineq_rhs.iter().chain(&self.eq_rhs).any(|v| !v.is_finite()) {
            return bad("non-finite right-hand side");
        }
        for rows in [&self.ineq, &self.eq] {
            if rows.idx.iter().any(|&j| j >= n) {
                return bad("column index out of range");
            }
            if rows.val.iter().any(|v| !v.is_finite()) {
                return bad("non-finite coefficient");
            }
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::MalformedProblem(format!("bad bounds on variable {j}")));
            }
        }
        Ok(())
    }

    pub fn residuals(&self, x: &[f64]) -> Residuals {
        let ineq = (0..self.ineq.len()).map(|i| self.ineq.dot(i, x) - self.ineq_rhs[i]).fold(0.0f64, f64::max);
        let eq = (0..self.eq.len()).map(|i| (self.eq.dot(i, x) - self.eq_rhs[i]).abs()).fold(0.0f64, f64::max);
        let bound = (0..self.n_vars).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j])).fold(0.0f64, f64::max);
        Residuals { ineq, eq, bound }
    }
}

/// Largest constraint violations of a point; zero when satisfied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    pub ineq: f64,
    pub eq: f64,
    pub bound: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.ineq.max(self.eq).max(self.bound)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub feas_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iters: 200_000, feas_tol: 1e-8 }
    }
}

/// Final basis of a solve, reusable as a warm start for a problem with the
/// same rows and finite-bound pattern (only right-hand sides and bound
/// values may differ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    columns: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; meaningful when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub solve_time: f64,
    pub basis: Option<Basis>,
    /// Lagrange multipliers certifying optimality; set when `Optimal`.
    pub multipliers: Option<Multipliers>,
}

/// KKT multipliers of an optimal solution: `c + G^T ineq + A^T eq - lower +
/// upper = 0` with `ineq, lower, upper >= 0` and complementary slackness.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers {
    pub ineq: Vec<f64>,
    pub eq: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<Vec<f64>>,
    pub iterations: usize,
}

pub fn solve(p: &LpProblem, opts: &SolveOptions) -> Result<LpSolution> {
    solve_warm(p, opts, None)
}

/// Like [`solve`], starting from `warm` when it is still feasible for the
/// dual program (which holds after any change of right-hand sides or bounds).
pub fn solve_warm(p: &LpProblem, opts: &SolveOptions, warm: Option<&Basis>) -> Result<LpSolution> {
    p.check()?;
    let clock = Stopwatch::start();
    let dual = DualForm::build(p);
    let result = simplex::run(&dual.sf, opts.feas_tol, opts.max_iters, warm.map(|b| b.columns.as_slice()));
    let x = dual.primal_point(&result.duals);
    let mut iterations = result.iterations;
    let status = match result.outcome {
        simplex::Outcome::Optimal => LpStatus::Optimal,
        // An unbounded dual certifies an empty primal.
        simplex::Outcome::Unbounded => LpStatus::Infeasible,
        simplex::Outcome::IterationLimit => LpStatus::IterationLimit,
        // No dual-feasible point: the primal is unbounded if it has any
        // feasible point at all, which a zero-cost solve decides.
        simplex::Outcome::Infeasible => {
            let mut zero = p.clone();
            zero.cost.iter_mut().for_each(|c| *c = 0.0);
            let f = solve(&zero, opts)?;
            iterations += f.iterations;
            match f.status {
                LpStatus::Optimal => LpStatus::Unbounded,
                other => other,
            }
        }
    };
    let objective = p.objective(&x);
    let multipliers = (status == LpStatus::Optimal).then(|| dual.multipliers(p, &result));
    Ok(LpSolution {
        status,
        x,
        objective,
        iterations,
        solve_time: clock.elapsed_secs(),
        basis: Some(Basis { columns: result.basis }),
        multipliers,
    })
}

/// Phase-one style feasibility test with a witness point.
pub fn check_feasible(p: &LpProblem) -> Result<Feasibility> {
    check_feasible_with(p, &SolveOptions::default())
}

pub fn check_feasible_with(p: &LpProblem, opts: &SolveOptions) -> Result<Feasibility> {
    let mut zero = p.clone();
    zero.cost.iter_mut().for_each(|c| *c = 0.0);
    let sol = solve(&zero, opts)?;
    let feasible = sol.status == LpStatus::Optimal;
    Ok(Feasibility { feasible, witness: feasible.then_some(sol.x), iterations: sol.iterations })
}

/// Dual standard form: one row per primal variable `j`
/// (`sum_i G_ij y_i + sum_r A_rj (z+_r - z-_r) = -c_j`) and one nonnegative
/// column per primal inequality, finite bound, and signed equality.
struct DualForm {
    sf: simplex::StandardForm,
    /// Row sign flips applied to make the right-hand side nonnegative.
    sign: Vec<f64>,
    origin: Vec<Origin>,
}

#[derive(Clone, Copy, Debug)]
enum Origin {
    Ineq(usize),
    Lower(usize),
    Upper(usize),
    EqPlus(usize),
    EqMinus(usize),
}

impl DualForm {
    fn build(p: &LpProblem) -> DualForm {
        let n = p.n_vars;
        let sign: Vec<f64> = p.cost.iter().map(|&c| if -c < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = p.cost.iter().zip(&sign).map(|(&c, &s)| -c * s).collect();
        let mut sf = simplex::StandardForm::new(n, rhs);
        let mut origin = Vec::new();

        let ineq = dedup_ineq(p);
        for (i, h) in ineq {
            let (idx, val) = p.ineq.row(i);
            sf.push_col(idx.iter().zip(val).map(|(&j, &v)| (j, v * sign[j])), h);
            origin.push(Origin::Ineq(i));
        }
        for j in 0..n {
            if p.lower[j].is_finite() {
                sf.push_col([(j, -sign[j])], -p.lower[j]);
                origin.push(Origin::Lower(j));
            }
            if p.upper[j].is_finite() {
                sf.push_col([(j, sign[j])], p.upper[j]);
                origin.push(Origin::Upper(j));
            }
        }
        for r in dedup_eq(p) {
            let (idx, val) = p.eq.row(r);
            let b = p.eq_rhs[r];
            sf.push_col(idx.iter().zip(val).map(|(&j, &v)| (j, v * sign[j])), b);
            origin.push(Origin::EqPlus(r));
            sf.push_col(idx.iter().zip(val).map(|(&j, &v)| (j, -v * sign[j])), -b);
            origin.push(Origin::EqMinus(r));
        }
        DualForm { sf, sign, origin }
    }

    fn multipliers(&self, p: &LpProblem, result: &simplex::EngineResult) -> Multipliers {
        let mut m = Multipliers {
            ineq: vec![0.0; p.ineq.len()],
            eq: vec![0.0; p.eq.len()],
            lower: vec![0.0; p.n_vars],
            upper: vec![0.0; p.n_vars],
        };
        for (&col, &v) in result.basis.iter().zip(&result.values) {
            let Some(origin) = self.origin.get(col) else { continue };
            match *origin {
                Origin::Ineq(i) => m.ineq[i] += v,
                Origin::Lower(j) => m.lower[j] += v,
                Origin::Upper(j) => m.upper[j] += v,
                Origin::EqPlus(r) => m.eq[r] += v,
                Origin::EqMinus(r) => m.eq[r] -= v,
            }
        }
        m
    }

    fn primal_point(&self, duals: &[f64]) -> Vec<f64> {
        duals.iter().zip(&self.sign).map(|(y, s)| y * s).collect()
    }
}

fn row_key(rows: &SparseRows, i: usize) -> Vec<(usize, u64)> {
    let (idx, val) = rows.row(i);
    let mut key: Vec<(usize, u64)> = idx.iter().zip(val).map(|(&j, &v)| (j, v.to_bits())).collect();
    key.sort_unstable();
    key
}

/// Inequality rows with identical coefficients collapse to the tightest one.
fn dedup_ineq(p: &LpProblem) -> Vec<(usize, f64)> {
    let mut seen: BTreeMap<Vec<(usize, u64)>, usize> = BTreeMap::new();
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(p.ineq.len());
    for i in 0..p.ineq.len() {
        let h = p.ineq_rhs[i];
        match seen.get(&row_key(&p.ineq, i)) {
            Some(&k) => {
                if h < out[k].1 {
                    out[k] = (i, h);
                }
            }
            None => {
                seen.insert(row_key(&p.ineq, i), out.len());
                out.push((i, h));
            }
        }
    }
    out
}

/// Equality rows that repeat an earlier row exactly (with the same rhs).
fn dedup_eq(p: &LpProblem) -> Vec<usize> {
    let mut seen: BTreeMap<(Vec<(usize, u64)>, u64), ()> = BTreeMap::new();
    (0..p.eq.len()).filter(|&r| seen.insert((row_key(&p.eq, r), p.eq_rhs[r].to_bits()), ()).is_none()).collect()
}

#[cfg(test)]
mod tests;
