//! Two-phase revised simplex on a standard-form program
//! `min c^T x  s.t.  A x = b, x >= 0` with `b >= 0`.
//!
//! One artificial column per row is implicit (index `n_struct + row`). Phase
//! one minimises their sum; in phase two they are pinned to zero. The basis
//! is held as a dense LU factorisation plus a product-form eta file that is
//! folded back into a fresh factorisation every [`REFACTOR_EVERY`] pivots.

use alloc::vec;
use alloc::vec::Vec;

use super::lu::{factorize, LuFactors};

pub(crate) const REFACTOR_EVERY: usize = 64;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const NONE: usize = usize::MAX;

/// Column-compressed standard-form program.
#[derive(Clone, Debug, Default)]
pub(crate) struct StandardForm {
    pub n_rows: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl StandardForm {
    pub fn new(n_rows: usize, rhs: Vec<f64>) -> Self {
        StandardForm { n_rows, col_ptr: vec![0], rhs, ..Default::default() }
    }

    pub fn n_struct(&self) -> usize {
        self.cost.len()
    }

    pub fn push_col(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, cost: f64) {
        for (r, v) in entries {
            if v != 0.0 {
                self.row_idx.push(r);
                self.vals.push(v);
            }
        }
        self.col_ptr.push(self.row_idx.len());
        self.cost.push(cost);
    }

    fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.vals[a..b])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    /// Phase one ended with a positive artificial sum.
    Infeasible,
    Unbounded,
    IterationLimit,
}

pub(crate) struct EngineResult {
    pub outcome: Outcome,
    /// Simplex multipliers, one per row.
    pub duals: Vec<f64>,
    pub basis: Vec<usize>,
    /// Values of the basic variables, by basis position.
    pub values: Vec<f64>,
    pub iterations: usize,
}

struct Eta {
    r: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

struct Engine<'a> {
    sf: &'a StandardForm,
    m: usize,
    n_struct: usize,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    xb: Vec<f64>,
    lu: LuFactors,
    etas: Vec<Eta>,
    phase_two: bool,
    iterations: usize,
    max_iters: usize,
    feas_scale: f64,
    scratch: Vec<f64>,
}

pub(crate) fn run(sf: &StandardForm, feas_tol: f64, max_iters: usize, warm: Option<&[usize]>) -> EngineResult {
    let m = sf.n_rows;
    let n_struct = sf.n_struct();
    let mut engine = Engine {
        sf,
        m,
        n_struct,
        basis: (n_struct..n_struct + m).collect(),
        pos_of: vec![NONE; n_struct + m],
        xb: sf.rhs.clone(),
        lu: factorize(0, |_, _| {}).factors,
        etas: Vec::new(),
        phase_two: false,
        iterations: 0,
        max_iters,
        feas_scale: feas_tol * sf.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs())),
        scratch: vec![0.0; m],
    };
    let feas_scale = engine.feas_scale;

    let mut warm_ok = false;
    if let Some(basis) = warm {
        if basis.len() == m && basis.iter().all(|&j| j < n_struct + m) && distinct(basis, n_struct + m) {
            engine.basis = basis.to_vec();
            engine.refactor();
            warm_ok = engine.xb.iter().all(|&v| v >= -feas_scale)
                && engine.basis.iter().zip(&engine.xb).all(|(&j, &v)| j < n_struct || v <= feas_scale);
            if !warm_ok {
                engine.basis = (n_struct..n_struct + m).collect();
            }
        }
    }
    if !warm_ok {
        engine.crash();
        engine.refactor();
        let outcome = engine.iterate();
        if outcome == Outcome::IterationLimit {
            return engine.finish(Outcome::IterationLimit);
        }
        if engine.infeasibility() > feas_scale {
            return engine.finish(Outcome::Infeasible);
        }
    }
    engine.phase_two = true;
    let outcome = engine.iterate();
    engine.finish(outcome)
}

fn distinct(basis: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    basis.iter().all(|&j| !core::mem::replace(&mut seen[j], true))
}

impl<'a> Engine<'a> {
    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct
    }

    fn infeasibility(&self) -> f64 {
        self.basis.iter().zip(&self.xb).filter(|(&j, _)| self.is_artificial(j)).map(|(_, &v)| v.max(0.0)).sum()
    }

    fn cost(&self, j: usize) -> f64 {
        match (self.phase_two, self.is_artificial(j)) {
            (false, true) => 1.0,
            (false, false) => 0.0,
            (true, true) => 0.0,
            (true, false) => self.sf.cost[j],
        }
    }

    fn load_column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if self.is_artificial(j) {
            out[j - self.n_struct] = 1.0;
        } else {
            let (rows, vals) = self.sf.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                out[r] = v;
            }
        }
    }

    /// Replaces artificials by singleton structural columns that are
    /// feasible on their own row, preferring the cheapest. The starting
    /// basis stays diagonal and primal feasible.
    fn crash(&mut self) {
        let mut pick: Vec<Option<(f64, usize)>> = vec![None; self.m];
        for j in 0..self.n_struct {
            let (rows, vals) = self.sf.col(j);
            if rows.len() != 1 {
                continue;
            }
            let (r, v) = (rows[0], vals[0]);
            if v > 0.0 || (v < 0.0 && self.sf.rhs[r] == 0.0) {
                let c = self.sf.cost[j];
                if pick[r].map_or(true, |(best, _)| c < best) {
                    pick[r] = Some((c, j));
                }
            }
        }
        for (r, p) in pick.into_iter().enumerate() {
            if let Some((_, j)) = p {
                self.basis[r] = j;
            }
        }
    }

    fn refactor(&mut self) {
        let f = {
            let this = &*self;
            factorize(self.m, |k, out| this.load_column(this.basis[k], out))
        };
        for &(k, r) in &f.replaced {
            self.basis[k] = self.n_struct + r;
        }
        self.lu = f.factors;
        self.etas.clear();
        self.pos_of.iter_mut().for_each(|p| *p = NONE);
        for (k, &j) in self.basis.iter().enumerate() {
            self.pos_of[j] = k;
        }
        let mut x = self.sf.rhs.clone();
        self.lu.solve(&mut x, &mut self.scratch);
        self.xb = x;
    }

    fn ftran(&mut self, v: &mut [f64]) {
        self.lu.solve(v, &mut self.scratch);
        for eta in &self.etas {
            let xr = v[eta.r] / eta.pivot;
            v[eta.r] = xr;
            if xr != 0.0 {
                for &(i, w) in &eta.others {
                    v[i] -= w * xr;
                }
            }
        }
    }

    fn btran(&mut self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut acc = c[eta.r];
            for &(i, w) in &eta.others {
                acc -= w * c[i];
            }
            c[eta.r] = acc / eta.pivot;
        }
        self.lu.solve_transpose(c, &mut self.scratch);
    }

    fn duals(&mut self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| self.cost(j)).collect();
        self.btran(&mut y);
        y
    }

    fn iterate(&mut self) -> Outcome {
        let m = self.m;
        let degenerate_limit = 3 * m.max(1);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut w = vec![0.0; m];
        loop {
            if self.iterations >= self.max_iters {
                return Outcome::IterationLimit;
            }
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactor();
            }
            // Phase one stops as soon as the artificials are at zero; any
            // that remain basic are pinned there in phase two.
            if !self.phase_two && self.infeasibility() <= self.feas_scale {
                return Outcome::Optimal;
            }
            let y = self.duals();

            // Pricing over structural columns only; artificials never re-enter.
            let mut entering = NONE;
            let mut best = -COST_TOL;
            for j in 0..self.n_struct {
                if self.pos_of[j] != NONE {
                    continue;
                }
                let (rows, vals) = self.sf.col(j);
                let mut d = self.cost(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    d -= y[r] * v;
                }
                if d < best {
                    entering = j;
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            if entering == NONE {
                return Outcome::Optimal;
            }

            self.load_column(entering, &mut w);
            self.ftran(&mut w);

            let mut leave = NONE;
            let mut t_best = f64::INFINITY;
            for r in 0..m {
                let wr = w[r];
                let t = if wr > PIVOT_TOL {
                    self.xb[r].max(0.0) / wr
                } else if wr < -PIVOT_TOL && self.phase_two && self.is_artificial(self.basis[r]) {
                    // pinned artificial: x_r - t w_r <= 0
                    (-self.xb[r]).max(0.0) / -wr
                } else {
                    continue;
                };
                let better = if leave == NONE || t < t_best - 1e-12 {
                    true
                } else if t <= t_best + 1e-12 {
                    if bland {
                        self.basis[r] < self.basis[leave]
                    } else {
                        let (art_r, art_l) = (self.is_artificial(self.basis[r]), self.is_artificial(self.basis[leave]));
                        (art_r && !art_l) || (art_r == art_l && wr.abs() > w[leave].abs())
                    }
                } else {
                    false
                };
                if better {
                    leave = r;
                    t_best = t_best.min(t);
                }
            }
            if leave == NONE {
                return Outcome::Unbounded;
            }
            let t = t_best;
            for (x, wi) in self.xb.iter_mut().zip(&w) {
                *x -= t * wi;
            }
            self.xb[leave] = t;
            let old = self.basis[leave];
            self.pos_of[old] = NONE;
            self.basis[leave] = entering;
            self.pos_of[entering] = leave;
            let others = w.iter().enumerate().filter(|&(i, &v)| i != leave && v != 0.0).map(|(i, &v)| (i, v)).collect();
            self.etas.push(Eta { r: leave, pivot: w[leave], others });
            self.iterations += 1;

            if t <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    fn finish(mut self, outcome: Outcome) -> EngineResult {
        self.refactor();
        let duals = self.duals();
        EngineResult { outcome, duals, basis: self.basis, values: self.xb, iterations: self.iterations }
    }
}
