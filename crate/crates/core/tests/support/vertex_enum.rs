//! Brute-force reference for small bounded LPs: every vertex is the solution
//! of some `n x n` subsystem of active constraints, so the optimum is the best
//! feasible one among them.

use sl1m_core::lp::LpProblem;

/// Constraint rows `a x <= b`, with equalities and finite bounds expanded.
fn halfspaces(p: &LpProblem) -> Vec<(Vec<f64>, f64)> {
    let n = p.n_vars;
    let dense = |idx: &[usize], val: &[f64], s: f64| {
        let mut a = vec![0.0; n];
        for (&j, &v) in idx.iter().zip(val) {
            a[j] += s * v;
        }
        a
    };
    let mut out = Vec::new();
    for i in 0..p.ineq.len() {
        let (idx, val) = p.ineq.row(i);
        out.push((dense(idx, val, 1.0), p.ineq_rhs[i]));
    }
    for r in 0..p.eq.len() {
        let (idx, val) = p.eq.row(r);
        out.push((dense(idx, val, 1.0), p.eq_rhs[r]));
        out.push((dense(idx, val, -1.0), -p.eq_rhs[r]));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if p.upper[j].is_finite() {
            out.push((e.clone(), p.upper[j]));
        }
        if p.lower[j].is_finite() {
            e[j] = -1.0;
            out.push((e, -p.lower[j]));
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn subsets(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..m {
        cur.push(i);
        subsets(m, k, i + 1, cur, f);
        cur.pop();
    }
}

/// Best vertex `(objective, point)` of a bounded LP, or `None` if it is empty.
pub fn best_vertex(p: &LpProblem, tol: f64) -> Option<(f64, Vec<f64>)> {
    let n = p.n_vars;
    let rows = halfspaces(p);
    let mut best: Option<(f64, Vec<f64>)> = None;
    subsets(rows.len(), n, 0, &mut Vec::new(), &mut |pick| {
        let a = pick.iter().map(|&i| rows[i].0.clone()).collect();
        let b = pick.iter().map(|&i| rows[i].1).collect();
        let Some(x) = solve_square(a, b) else { return };
        let ok = rows.iter().all(|(a, b)| {
            let lhs: f64 = a.iter().zip(&x).map(|(u, v)| u * v).sum();
            lhs <= b + tol * (1.0 + b.abs())
        });
        if ok {
            let obj = p.objective(&x);
            if best.as_ref().map_or(true, |(o, _)| obj < *o) {
                best = Some((obj, x));
            }
        }
    });
    best
}
