//! Plain-text dump of a linear program for diffing against other solvers.
//!
//! ```text
//! LPDUMP 1
//! DIMS <n_vars> <n_ineq> <n_eq>
//! OBJ <var> <coef>                one line per nonzero cost
//! LE <row> <var> <coef>           one line per nonzero of G
//! LE_RHS <row> <rhs>
//! EQ <row> <var> <coef>
//! EQ_RHS <row> <rhs>
//! BND <var> <lower> <upper>       one line per variable, `inf`/`-inf` allowed
//! END
//! ```

use alloc::string::String;
use core::fmt::Write;

use super::LpProblem;

pub fn dump_text(p: &LpProblem) -> String {
    let mut s = String::new();
    // Writing into a String cannot fail.
    let _ = write_dump(p, &mut s);
    s
}

fn write_dump(p: &LpProblem, s: &mut String) -> core::fmt::Result {
    writeln!(s, "LPDUMP 1")?;
    writeln!(s, "DIMS {} {} {}", p.n_vars, p.ineq.len(), p.eq.len())?;
    for (j, c) in p.cost.iter().enumerate() {
        if *c != 0.0 {
            writeln!(s, "OBJ {j} {c:.17e}")?;
        }
    }
    for (tag, rows, rhs) in [("LE", &p.ineq, &p.ineq_rhs), ("EQ", &p.eq, &p.eq_rhs)] {
        for i in 0..rows.len() {
            let (idx, val) = rows.row(i);
            for (j, v) in idx.iter().zip(val) {
                writeln!(s, "{tag} {i} {j} {v:.17e}")?;
            }
            writeln!(s, "{tag}_RHS {i} {:.17e}", rhs[i])?;
        }
    }
    for j in 0..p.n_vars {
        writeln!(s, "BND {j} {} {}", fmt_bound(p.lower[j]), fmt_bound(p.upper[j]))?;
    }
    writeln!(s, "END")
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        alloc::format!("{v:.17e}")
    }
}
