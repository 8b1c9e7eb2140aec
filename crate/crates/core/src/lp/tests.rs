use super::*;

fn kkt_violation(p: &LpProblem, sol: &LpSolution) -> f64 {
    let m = sol.multipliers.as_ref().expect("optimal solutions carry multipliers");
    let mut grad = p.cost.clone();
    for i in 0..p.ineq.len() {
        let (idx, val) = p.ineq.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            grad[j] += m.ineq[i] * v;
        }
    }
    for r in 0..p.eq.len() {
        let (idx, val) = p.eq.row(r);
        for (&j, &v) in idx.iter().zip(val) {
            grad[j] += m.eq[r] * v;
        }
    }
    let mut worst: f64 = 0.0;
    for j in 0..p.n_vars {
        grad[j] += m.upper[j] - m.lower[j];
        worst = worst.max(grad[j].abs());
        worst = worst.max(-m.lower[j]).max(-m.upper[j]);
        if m.lower[j] > 1e-9 {
            worst = worst.max(((sol.x[j] - p.lower[j]) * m.lower[j]).abs());
        }
        if m.upper[j] > 1e-9 {
            worst = worst.max(((p.upper[j] - sol.x[j]) * m.upper[j]).abs());
        }
    }
    for i in 0..p.ineq.len() {
        worst = worst.max(-m.ineq[i]);
        let slack = p.ineq_rhs[i] - p.ineq.dot(i, &sol.x);
        worst = worst.max((slack * m.ineq[i]).abs());
    }
    worst
}

#[test]
fn one_variable_lower_bound() {
    let mut p = LpProblem::new(1);
    p.cost[0] = 1.0;
    p.set_bounds(0, 1.0, f64::INFINITY);
    let s = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.x[0] - 1.0).abs() < 1e-12);
    assert!(kkt_violation(&p, &s) < 1e-9);
}

#[test]
fn contradictory_bounds_are_infeasible() {
    let mut p = LpProblem::new(1);
    p.add_le(&[(0, 1.0)], -1.0);
    p.set_bounds(0, 1.0, f64::INFINITY);
    let s = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
}

#[test]
fn simplex_face_objective_and_bland_vertex() {
    // min -x - y  s.t. x + y <= 1, x, y >= 0; the optimal face has the
    // vertices (1, 0) and (0, 1), and the first-index rule lands on (1, 0).
    let mut p = LpProblem::new(2);
    p.cost = vec![-1.0, -1.0];
    p.add_le(&[(0, 1.0), (1, 1.0)], 1.0);
    p.set_bounds(0, 0.0, f64::INFINITY);
    p.set_bounds(1, 0.0, f64::INFINITY);
    let s = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 1.0).abs() < 1e-12);
    assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12, "x = {:?}", s.x);
    assert!(kkt_violation(&p, &s) < 1e-9);
}

#[test]
fn unbounded_is_detected() {
    let mut p = LpProblem::new(2);
    p.cost = vec![-1.0, 0.0];
    p.add_le(&[(0, 1.0), (1, -1.0)], 1.0);
    let s = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Unbounded);

    // Unbounded objective over an empty set is still infeasible.
    p.add_le(&[(1, 1.0)], -1.0);
    p.add_le(&[(1, -1.0)], -1.0);
    let s = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
}

#[test]
fn empty_constraint_set_is_feasible_at_origin() {
    let p = LpProblem::new(4);
    let f = check_feasible(&p).unwrap();
    assert!(f.feasible);
    assert_eq!(f.witness.unwrap(), vec![0.0; 4]);
}

#[test]
fn crossed_bounds_have_no_witness() {
    let mut p = LpProblem::new(1);
    p.add_le(&[(0, -1.0)], -1.0);
    p.add_le(&[(0, 1.0)], 0.0);
    let f = check_feasible(&p).unwrap();
    assert!(!f.feasible);
    assert!(f.witness.is_none());
}

#[test]
fn overlapping_boxes_witness() {
    // [0, 2]^3 and [1, 3] x [-1, 1] x [1.5, 4] overlap in [1, 2] x [0, 1] x [1.5, 2].
    let mut p = LpProblem::new(3);
    let boxes = [([0.0, 0.0, 0.0], [2.0, 2.0, 2.0]), ([1.0, -1.0, 1.5], [3.0, 1.0, 4.0])];
    for (lo, hi) in boxes {
        for j in 0..3 {
            p.add_le(&[(j, 1.0)], hi[j]);
            p.add_le(&[(j, -1.0)], -lo[j]);
        }
    }
    let f = check_feasible(&p).unwrap();
    let w = f.witness.unwrap();
    assert!((1.0 - 1e-7..=2.0 + 1e-7).contains(&w[0]));
    assert!((-1e-7..=1.0 + 1e-7).contains(&w[1]));
    assert!((1.5 - 1e-7..=2.0 + 1e-7).contains(&w[2]));
    assert!(p.residuals(&w).max() <= 1e-7);
}

#[test]
fn equalities_and_duplicates() {
    // x + y = 2 (twice), x - y <= 0, min x + 2y -> x = y = 1
    let mut p = LpProblem::new(2);
    p.cost = vec![1.0, 2.0];
    p.add_eq(&[(0, 1.0), (1, 1.0)], 2.0);
    p.add_eq(&[(0, 1.0), (1, 1.0)], 2.0);
    p.add_le(&[(0, 1.0), (1, -1.0)], 0.0);
    p.add_le(&[(0, 1.0), (1, -1.0)], 0.5);
    let s = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    assert!(kkt_violation(&p, &s) < 1e-9);
}

#[test]
fn malformed_problems_are_rejected() {
    let mut p = LpProblem::new(2);
    p.add_le(&[(5, 1.0)], 1.0);
    assert!(matches!(solve(&p, &SolveOptions::default()), Err(Error::MalformedProblem(_))));
    let mut p = LpProblem::new(1);
    p.cost[0] = f64::NAN;
    assert!(matches!(solve(&p, &SolveOptions::default()), Err(Error::MalformedProblem(_))));
}

#[test]
fn iteration_limit_is_flagged() {
    let mut p = LpProblem::new(3);
    p.cost = vec![-1.0, -2.0, -3.0];
    for j in 0..3 {
        p.set_bounds(j, 0.0, 1.0);
    }
    p.add_le(&[(0, 1.0), (1, 1.0), (2, 1.0)], 2.0);
    let s = solve(&p, &SolveOptions { max_iters: 1, ..Default::default() }).unwrap();
    assert_eq!(s.status, LpStatus::IterationLimit);
}

#[test]
fn warm_start_after_bound_change() {
    let mut p = LpProblem::new(3);
    p.cost = vec![1.0, 1.0, 1.0];
    p.add_le(&[(0, -1.0), (1, -1.0)], -1.0);
    p.add_le(&[(1, -1.0), (2, -1.0)], -1.0);
    for j in 0..3 {
        p.set_bounds(j, 0.0, 1.0);
    }
    let opts = SolveOptions::default();
    let first = solve(&p, &opts).unwrap();
    assert!((first.objective - 1.0).abs() < 1e-12);
    p.set_bounds(1, 0.0, 0.0);
    let cold = solve(&p, &opts).unwrap();
    let warm = solve_warm(&p, &opts, first.basis.as_ref()).unwrap();
    assert_eq!(cold.status, LpStatus::Optimal);
    assert_eq!(warm.status, LpStatus::Optimal);
    assert!((cold.objective - 2.0).abs() < 1e-12);
    assert!((warm.objective - 2.0).abs() < 1e-12);
}

#[test]
fn row_scaling_keeps_status_and_point() {
    // Unique optimum at (1.5, 0.5).
    let mut p = LpProblem::new(2);
    p.cost = vec![-1.0, -2.0];
    p.add_le(&[(0, 1.0), (1, 1.0)], 2.0);
    p.add_le(&[(0, -1.0), (1, 3.0)], 0.0);
    p.add_le(&[(0, 1.0)], 10.0);
    let base = solve(&p, &SolveOptions::default()).unwrap();
    for (row, lambda) in [(0, 7.0), (1, 1e-3), (2, 250.0)] {
        let mut q = p.clone();
        q.ineq.scale_row(row, lambda);
        q.ineq_rhs[row] *= lambda;
        let s = solve(&q, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, base.status);
        for j in 0..2 {
            assert!((s.x[j] - base.x[j]).abs() < 1e-7);
        }
    }
    assert!((base.x[0] - 1.5).abs() < 1e-12 && (base.x[1] - 0.5).abs() < 1e-12);
}

#[test]
fn dump_lists_every_row() {
    let mut p = LpProblem::new(2);
    p.cost = vec![1.0, 0.0];
    p.add_le(&[(0, 1.0), (1, -2.0)], 3.0);
    p.add_eq(&[(1, 1.0)], 0.5);
    p.set_bounds(0, 0.0, f64::INFINITY);
    let text = dump_text(&p);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "LPDUMP 1");
    assert_eq!(lines[1], "DIMS 2 1 1");
    assert!(text.contains("LE 0 1 -2.00000000000000000e0"));
    assert!(text.contains("BND 0 0.00000000000000000e0 inf"));
    assert!(text.contains("BND 1 -inf inf"));
    assert_eq!(*lines.last().unwrap(), "END");
}
