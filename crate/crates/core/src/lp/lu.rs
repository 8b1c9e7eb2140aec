//! Sparse LU factorisation of a simplex basis.
//!
//! Right-looking elimination with Markowitz pivot selection and threshold
//! partial pivoting. Bases of the planner's programs are mostly unit and
//! short columns, so the factors stay close to the basis in size.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_TOL: f64 = 1e-11;
/// Entries below this after an update are treated as cancelled.
const DROP_TOL: f64 = 1e-14;
/// A pivot must be at least this fraction of the largest entry in its column.
const THRESHOLD: f64 = 0.1;
/// Columns examined per pivot search, in order of increasing count.
const SEARCH_COLS: usize = 4;

pub(crate) struct LuFactors {
    /// Per step: pivot row, pivot column (basis position), pivot value.
    pivots: Vec<(usize, usize, f64)>,
    /// Per step: `(row, multiplier)` below the pivot.
    l: Vec<Vec<(usize, f64)>>,
    /// Per step: `(basis position, value)` right of the pivot.
    u: Vec<Vec<(usize, f64)>>,
}

/// Result of factoring: the factors plus the basis positions whose column
/// had to be replaced by a unit column `e_row` to keep the basis regular.
pub(crate) struct Factorization {
    pub factors: LuFactors,
    pub replaced: Vec<(usize, usize)>,
}

/// Factors the square matrix whose columns are produced by `column(k, out)`;
/// `out` arrives zeroed.
pub(crate) fn factorize(n: usize, mut column: impl FnMut(usize, &mut [f64])) -> Factorization {
    let mut dense = vec![0.0; n];
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for k in 0..n {
        dense.iter_mut().for_each(|v| *v = 0.0);
        column(k, &mut dense);
        cols.push(dense.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, &v)| (i, v)).collect());
    }
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, col) in cols.iter().enumerate() {
        for &(i, _) in col {
            rows[i].push(c);
        }
    }
    let mut col_live = vec![true; n];
    let mut row_live = vec![true; n];
    let mut f = LuFactors { pivots: Vec::with_capacity(n), l: Vec::with_capacity(n), u: Vec::with_capacity(n) };
    let mut replaced = Vec::new();
    let mut order: Vec<usize> = Vec::with_capacity(n);

    for _ in 0..n {
        order.clear();
        order.extend((0..n).filter(|&c| col_live[c]));
        let key = |c: &usize| (cols[*c].len(), *c);
        let take = SEARCH_COLS.min(order.len());
        if take < order.len() {
            order.select_nth_unstable_by_key(take, key);
            order.truncate(take);
        }
        order.sort_unstable_by_key(key);

        // Best (cost, -|v|, row, col) over the examined columns.
        let mut best: Option<(usize, f64, usize, usize)> = None;
        let mut dependent = None;
        for &c in &order {
            let max = cols[c].iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
            if max <= PIVOT_TOL {
                dependent = Some(c);
                break;
            }
            let cc = cols[c].len() - 1;
            for &(i, v) in &cols[c] {
                if v.abs() < THRESHOLD * max {
                    continue;
                }
                let cand = ((rows[i].len() - 1) * cc, -v.abs(), i, c);
                let better = match best {
                    None => true,
                    Some(b) => (cand.0, cand.1, cand.2, cand.3) < (b.0, b.1, b.2, b.3),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let (r, c) = match dependent {
            Some(c) => {
                // Substitute the unit column of the first live row. Earlier
                // eliminations never touch such a column, so it is exact.
                let r = (0..n).find(|&i| row_live[i]).expect("a live row per live column");
                for &(i, _) in &cols[c] {
                    rows[i].retain(|&x| x != c);
                }
                cols[c] = vec![(r, 1.0)];
                rows[r].push(c);
                replaced.push((c, r));
                (r, c)
            }
            None => {
                let b = best.expect("a live column has a pivot candidate");
                (b.2, b.3)
            }
        };

        let pivot = cols[c].iter().find(|e| e.0 == r).map(|e| e.1).unwrap();
        let lcol: Vec<(usize, f64)> = cols[c].iter().filter(|e| e.0 != r).map(|&(i, v)| (i, v / pivot)).collect();
        for &(i, _) in &cols[c] {
            rows[i].retain(|&x| x != c);
        }
        col_live[c] = false;
        row_live[r] = false;
        cols[c].clear();

        let mut urow = Vec::with_capacity(rows[r].len());
        for j in core::mem::take(&mut rows[r]) {
            let pos = cols[j].iter().position(|e| e.0 == r).unwrap();
            let u = cols[j].swap_remove(pos).1;
            urow.push((j, u));
            for &(i, l) in &lcol {
                match cols[j].iter().position(|e| e.0 == i) {
                    Some(p) => {
                        let v = cols[j][p].1 - l * u;
                        if v.abs() <= DROP_TOL {
                            cols[j].swap_remove(p);
                            rows[i].retain(|&x| x != j);
                        } else {
                            cols[j][p].1 = v;
                        }
                    }
                    None => {
                        let v = -l * u;
                        if v.abs() > DROP_TOL {
                            cols[j].push((i, v));
                            rows[i].push(j);
                        }
                    }
                }
            }
        }
        f.pivots.push((r, c, pivot));
        f.l.push(lcol);
        f.u.push(urow);
    }
    Factorization { factors: f, replaced }
}

impl LuFactors {
    /// Solves `B x = v` in place (`v` indexed by row, `x` by basis position).
    pub(crate) fn solve(&self, v: &mut [f64], scratch: &mut [f64]) {
        for (s, &(r, _, _)) in self.pivots.iter().enumerate() {
            let vr = v[r];
            if vr != 0.0 {
                for &(i, l) in &self.l[s] {
                    v[i] -= l * vr;
                }
            }
        }
        for (s, &(r, c, p)) in self.pivots.iter().enumerate().rev() {
            let mut acc = v[r];
            for &(j, u) in &self.u[s] {
                acc -= u * scratch[j];
            }
            scratch[c] = acc / p;
        }
        v.copy_from_slice(&scratch[..v.len()]);
    }

    /// Solves `B^T y = c` in place (`c` indexed by basis position, `y` by row).
    pub(crate) fn solve_transpose(&self, c: &mut [f64], scratch: &mut [f64]) {
        for (s, &(r, col, p)) in self.pivots.iter().enumerate() {
            let z = c[col] / p;
            scratch[r] = z;
            if z != 0.0 {
                for &(j, u) in &self.u[s] {
                    c[j] -= u * z;
                }
            }
        }
        for (s, &(r, _, _)) in self.pivots.iter().enumerate().rev() {
            let mut acc = scratch[r];
            for &(i, l) in &self.l[s] {
                acc -= l * scratch[i];
            }
            scratch[r] = acc;
        }
        c.copy_from_slice(&scratch[..c.len()]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize, m: &[f64]) -> Factorization {
        // m is row-major
        factorize(n, |k, out| {
            for i in 0..n {
                out[i] = m[i * n + k];
            }
        })
    }

    fn check_solves(n: usize, m: &[f64]) {
        let f = dense(n, m);
        assert!(f.replaced.is_empty());
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.37 - (i % 3) as f64).collect();
        let mut v: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i * n + j] * x_true[j]).sum()).collect();
        let mut scratch = vec![0.0; n];
        f.factors.solve(&mut v, &mut scratch);
        for i in 0..n {
            assert!((v[i] - x_true[i]).abs() < 1e-10, "{v:?}");
        }
        let mut c: Vec<f64> = (0..n).map(|j| (0..n).map(|i| m[i * n + j] * x_true[i]).sum()).collect();
        f.factors.solve_transpose(&mut c, &mut scratch);
        for i in 0..n {
            assert!((c[i] - x_true[i]).abs() < 1e-10, "{c:?}");
        }
    }

    #[test]
    fn solves_both_directions() {
        check_solves(3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 4.0]);
    }

    #[test]
    fn fill_in_is_handled() {
        // Arrow matrix: eliminating the dense column first fills everything.
        let n = 6;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 4.0 + i as f64;
            m[i * n] = 1.0;
            m[i] = 1.0;
        }
        check_solves(n, &m);
    }

    #[test]
    fn pseudo_random_dense_matrix() {
        let n = 9;
        let mut state = 12345u64;
        let m: Vec<f64> = (0..n * n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 2001) as f64 / 1000.0 - 1.0
            })
            .collect();
        check_solves(n, &m);
    }

    #[test]
    fn singular_column_is_replaced() {
        let m = [1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 1.0];
        let f = dense(3, &m);
        assert_eq!(f.replaced.len(), 1);
        // Either of the two proportional columns may be the one dropped.
        assert!(f.replaced[0].0 < 2);
    }
}
