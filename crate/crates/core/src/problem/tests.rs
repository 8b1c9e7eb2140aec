use super::*;
use crate::lp::{solve, LpStatus, SolveOptions};
use crate::models::{biped, biped_walk, flat_rect, LEFT};

fn start() -> Vec3 {
    Vec3::new(0.0, -0.1, 0.0)
}

fn floor(id: usize) -> Surface {
    flat_rect(id, (-0.3, -0.4), (0.3, 0.4), 0.0)
}

fn tilted(id: usize, x0: f64) -> Surface {
    // Ramp rising 0.1 m over 0.6 m along x.
    Surface::from_vertices(
        id,
        &[
            Vec3::new(x0, -0.4, 0.0),
            Vec3::new(x0 + 0.6, -0.4, 0.1),
            Vec3::new(x0 + 0.6, 0.4, 0.1),
            Vec3::new(x0, 0.4, 0.0),
        ],
    )
    .unwrap()
}

fn solve_ok(a: &Assembled) -> Vec<f64> {
    let s = solve(&a.lp, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    s.x
}

#[test]
fn single_square_has_zero_slack() {
    let inst = biped_walk(vec![floor(0)], vec![vec![0]], start(), 0.0, GoalSpec::free());
    let a = build_sl1m(&inst).unwrap();
    assert_eq!(a.layout.alpha[0].len(), 1);
    let x = solve_ok(&a);
    assert!(x[a.layout.alpha[0].start] <= 1e-8);
    assert!(inst.surfaces[0].contains(a.layout.foot_value(&x, 1), 1e-7));
}

#[test]
fn unreachable_candidate_keeps_its_slack() {
    // Surface 1 lies 2 m away; only the start floor is reachable.
    let far = flat_rect(1, (2.0, -0.4), (2.5, 0.4), 0.0);
    let inst = biped_walk(vec![floor(0), far], vec![vec![1, 0]], start(), 0.0, GoalSpec::free());
    let a = build_sl1m(&inst).unwrap();
    let x = solve_ok(&a);
    let alphas = a.layout.alphas(&x, 1);
    assert_eq!(alphas[0].0, 1);
    assert!(alphas[0].1 > 1.0, "alpha of the far surface: {}", alphas[0].1);
    assert!(alphas[1].1 <= 1e-8);
}

#[test]
fn zero_gamma_cost_is_alpha_indicator() {
    let inst = biped_walk(vec![floor(0), tilted(1, 0.3)], vec![vec![0, 1]; 3], start(), 0.0, GoalSpec::free());
    let a = build_sl1m(&inst).unwrap();
    let mut expected = vec![0.0; a.layout.n_vars];
    for r in &a.layout.alpha {
        r.clone().for_each(|j| expected[j] = 1.0);
    }
    assert_eq!(a.lp.cost, expected);
}

#[test]
fn layout_blocks_follow_variable_order() {
    let inst = biped_walk(vec![floor(0), tilted(1, 0.3)], vec![vec![0, 1], vec![1]], start(), 0.0, GoalSpec::free());
    let l = build_sl1m(&inst).unwrap().layout;
    assert_eq!(l.p, 0);
    assert_eq!(l.alpha, vec![6..8, 8..9]);
    assert_eq!(l.beta, vec![9..11, 11..12]);
    assert_eq!((l.c0, l.c1), (12, 18));
    assert_eq!(l.n_vars, 24);
}

#[test]
fn fixed_single_phase_has_nine_variables() {
    let inst = biped_walk(vec![floor(0)], vec![vec![0]], start(), 0.0, GoalSpec::free());
    let a = build_fixed(&inst, &[0], FixedObjective::Feasibility).unwrap();
    assert_eq!(a.lp.n_vars, 9);
}

#[test]
fn fixed_on_unreachable_surface_is_infeasible() {
    let far = flat_rect(1, (2.0, -0.4), (2.5, 0.4), 0.0);
    let inst = biped_walk(vec![floor(0), far], vec![vec![1, 0]], start(), 0.0, GoalSpec::free());
    let a = build_fixed(&inst, &[1], FixedObjective::Feasibility).unwrap();
    assert_eq!(solve(&a.lp, &SolveOptions::default()).unwrap().status, LpStatus::Infeasible);
    assert!(matches!(
        build_fixed(&inst, &[3], FixedObjective::Feasibility),
        Err(Error::InvalidAssignment { phase: 1, surface: 3 })
    ));
}

#[test]
fn fixed_on_sparse_selection_keeps_surfaces() {
    let surfaces = vec![floor(0), tilted(1, 0.3), flat_rect(2, (0.9, -0.4), (1.5, 0.4), 0.1)];
    let inst =
        biped_walk(surfaces, vec![vec![0, 1, 2]; 4], start(), 0.0, GoalSpec { kind: GoalKind::Surface(2), com: None });
    let relax = build_sl1m(&inst).unwrap();
    let x = solve_ok(&relax);
    let pick: Vec<usize> = (1..=4)
        .map(|k| {
            let a = relax.layout.alphas(&x, k);
            a.iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap().0
        })
        .collect();
    let fixed = build_fixed(&inst, &pick, FixedObjective::Centering).unwrap();
    let y = solve_ok(&fixed);
    for (k, &s) in pick.iter().enumerate() {
        assert!(inst.surfaces[s].contains(fixed.layout.foot_value(&y, k + 1), 1e-7));
    }
}

/// Closed-form row counts for the relaxation.
fn expected_rows(inst: &ProblemInstance) -> (usize, usize, usize) {
    let n = inst.n_phases();
    let eff = |l: usize| &inst.effectors[inst.effector_at(l)];
    let mult = |l: usize| {
        if l == 0 {
            return 1;
        }
        let c = &inst.phases[l - 1].candidates;
        let d = inst.surfaces[c[0]].normal;
        let uniform = c.iter().all(|&s| (inst.surfaces[s].normal - d).max_abs() <= 1e-9);
        if c.len() == 1 || (inst.build.simplify && uniform) {
            1
        } else {
            c.len()
        }
    };
    let mut block = 0;
    let mut eq = 0;
    let mut ineq = 0;
    for k in 1..=n {
        for &i in &inst.phases[k - 1].candidates {
            block += inst.surfaces[i].boundary.len() + 1 + 2;
            eq += 1;
            ineq += inst.surfaces[i].boundary.len() + 2;
        }
        ineq += eff(k - 1).foot.len() * mult(k - 1) + eff(k).foot.len() * mult(k);
        ineq += eff(k).relative.len() * mult(k);
        ineq += 2 * eff(k - 1).com.len() * mult(k - 1) + 2 * eff(k).com.len() * mult(k);
    }
    if inst.initial.com.is_some() {
        ineq += 6;
    }
    if let GoalKind::Surface(g) = inst.goal.kind {
        let goal_contacts = if n >= 2 { 2 } else { 1 };
        ineq += goal_contacts * inst.surfaces[g].boundary.len();
        eq += goal_contacts;
    }
    (block, ineq, eq)
}

#[test]
fn row_counts_match_closed_form() {
    let surfaces = vec![
        floor(0),
        tilted(1, 0.3),
        flat_rect(2, (0.9, -0.4), (1.5, 0.4), 0.1),
        flat_rect(3, (0.2, 0.5), (0.8, 0.9), 0.0),
    ];
    for simplify in [true, false] {
        let mut inst = biped_walk(
            surfaces.clone(),
            vec![vec![0, 1], vec![1, 2, 3], vec![2], vec![0, 3], vec![2, 3]],
            start(),
            0.0,
            GoalSpec { kind: GoalKind::Surface(2), com: None },
        );
        inst.build.simplify = simplify;
        inst.initial.com = Some(Aabb::around(Vec3::new(0.0, -0.1, 0.8), Vec3::new(0.1, 0.05, 0.1)));
        let a = build_sl1m(&inst).unwrap();
        let (block, ineq, eq) = expected_rows(&inst);
        assert_eq!(a.lp.ineq.len(), ineq);
        assert_eq!(a.lp.eq.len(), eq);
        let tagged = a
            .ineq_tags
            .iter()
            .chain(&a.eq_tags)
            .filter(|t| matches!(t.kind, RowKind::SurfaceBoundary | RowKind::SurfacePlane | RowKind::SlackCoupling))
            .count();
        assert_eq!(tagged, block);
    }
}

#[test]
fn simplification_drops_slacks_without_changing_optimum() {
    // Coplanar strips and point feet: every contact is orientation-free.
    let strips: Vec<Surface> =
        (0..4).map(|i| flat_rect(i, (0.3 * i as f64 - 0.1, -0.5), (0.3 * i as f64 + 0.199, 0.5), 0.0)).collect();
    let mut inst =
        biped_walk(strips, vec![vec![0, 1, 2, 3]; 4], start(), 0.0, GoalSpec { kind: GoalKind::Surface(3), com: None });
    for e in &mut inst.effectors {
        e.foot = Polytope::xy_rect((0.0, 0.0), (0.0, 0.0));
    }
    let simple = build_sl1m(&inst).unwrap();
    for (tag, k) in simple.ineq_tags.iter().zip(0..) {
        if matches!(tag.kind, RowKind::Equilibrium | RowKind::ComReach | RowKind::RelativeFoot) {
            let (idx, _) = simple.lp.ineq.row(k);
            assert!(idx.iter().all(|j| !simple.layout.alpha.iter().any(|r| r.contains(j))));
        }
    }
    inst.build.simplify = false;
    let full = build_sl1m(&inst).unwrap();
    assert!(full.lp.ineq.len() > simple.lp.ineq.len());
    let a = solve(&simple.lp, &SolveOptions::default()).unwrap();
    let b = solve(&full.lp, &SolveOptions::default()).unwrap();
    assert!((a.objective - b.objective).abs() <= 1e-8, "{} vs {}", a.objective, b.objective);
}

#[test]
fn fixed_witness_extends_to_relaxation() {
    let surfaces = vec![floor(0), tilted(1, 0.3), flat_rect(2, (0.9, -0.4), (1.5, 0.4), 0.1)];
    let inst = biped_walk(surfaces, vec![vec![0, 1, 2]; 3], start(), 0.0, GoalSpec::free());
    let pick = [0, 1, 1];
    let fixed = build_fixed(&inst, &pick, FixedObjective::Feasibility).unwrap();
    let xf = solve_ok(&fixed);
    let relax = build_sl1m(&inst).unwrap();
    let l = &relax.layout;
    let mut x = vec![0.0; l.n_vars];
    for k in 1..=3 {
        x[l.foot(k)..l.foot(k) + 3].copy_from_slice(&xf[fixed.layout.foot(k)..fixed.layout.foot(k) + 3]);
        for m in 0..2 {
            x[l.com(k, m)..l.com(k, m) + 3].copy_from_slice(&xf[fixed.layout.com(k, m)..fixed.layout.com(k, m) + 3]);
        }
        for (idx, &s) in l.candidates[k - 1].iter().enumerate() {
            let surf = &inst.surfaces[s];
            x[l.beta[k - 1].start + idx] = surf.normal.dot(l.foot_value(&x, k)) - surf.offset;
        }
    }
    // Smallest alpha of each surface that satisfies its rows, computed from
    // the rows themselves: alpha >= row value without the alpha term.
    for i in 0..relax.lp.ineq.len() {
        let (idx, val) = relax.lp.ineq.row(i);
        let Some(pos) = idx.iter().position(|j| l.alpha.iter().any(|r| r.contains(j))) else { continue };
        let a = idx[pos];
        let rest: f64 = idx.iter().zip(val).filter(|(j, _)| **j != a).map(|(&j, &v)| v * x[j]).sum();
        x[a] = x[a].max(rest - relax.lp.ineq_rhs[i]);
    }
    for k in 1..=3 {
        for (s, alpha) in l.alphas(&x, k) {
            if s == pick[k - 1] {
                assert!(alpha <= 1e-9, "selected surface {s} of phase {k} needs slack {alpha}");
            }
        }
    }
    assert!(relax.lp.residuals(&x).max() <= 1e-9);
}

#[test]
fn mi_with_fixed_binaries_matches_fixed_program() {
    let surfaces = vec![floor(0), tilted(1, 0.3), flat_rect(2, (0.9, -0.4), (1.5, 0.4), 0.1)];
    let inst = biped_walk(surfaces, vec![vec![0, 1, 2]; 3], start(), 0.0, GoalSpec::free());
    let m = default_big_m(&inst);
    for pick in [[0, 0, 1], [0, 1, 1], [0, 1, 2], [2, 2, 2]] {
        let fixed = build_fixed(&inst, &pick, FixedObjective::Feasibility).unwrap();
        let mut mi = build_mi(&inst, m).unwrap();
        for k in 1..=3 {
            for (idx, &s) in mi.layout.candidates[k - 1].clone().iter().enumerate() {
                let v = if s == pick[k - 1] { 1.0 } else { 0.0 };
                mi.lp.set_bounds(mi.layout.binary[k - 1].start + idx, v, v);
            }
        }
        let sf = solve(&fixed.lp, &SolveOptions::default()).unwrap();
        let sm = solve(&mi.lp, &SolveOptions::default()).unwrap();
        assert_eq!(sf.status, sm.status, "assignment {pick:?}");
        if sf.status != LpStatus::Optimal {
            continue;
        }
        // Each witness satisfies the other program.
        let mut xm = vec![0.0; mi.layout.n_vars];
        for k in 1..=3 {
            for (idx, &s) in mi.layout.candidates[k - 1].iter().enumerate() {
                xm[mi.layout.binary[k - 1].start + idx] = if s == pick[k - 1] { 1.0 } else { 0.0 };
            }
        }
        let copy = |from: &[f64], fl: &VariableLayout, to: &mut [f64], tl: &VariableLayout| {
            for k in 1..=3 {
                for (a, b) in [(fl.foot(k), tl.foot(k)), (fl.com(k, 0), tl.com(k, 0)), (fl.com(k, 1), tl.com(k, 1))] {
                    to[b..b + 3].copy_from_slice(&from[a..a + 3]);
                }
            }
        };
        copy(&sf.x, &fixed.layout, &mut xm, &mi.layout);
        assert!(mi.lp.residuals(&xm).max() <= 1e-6);
        let mut xf = vec![0.0; fixed.layout.n_vars];
        copy(&sm.x, &mi.layout, &mut xf, &fixed.layout);
        assert!(fixed.lp.residuals(&xf).max() <= 1e-6);
    }
}

#[test]
fn mi_singletons_are_integral() {
    let inst = biped_walk(vec![floor(0), tilted(1, 0.3)], vec![vec![0], vec![1]], start(), 0.0, GoalSpec::free());
    let mi = build_mi(&inst, default_big_m(&inst)).unwrap();
    let x = solve_ok(&mi);
    for r in &mi.layout.binary {
        for j in r.clone() {
            assert!((x[j] - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn small_big_m_cuts_off_distant_candidates() {
    // Surface 1 is far from the walk; with M below that distance its
    // deactivated rows still bind, so the encoding becomes infeasible.
    let far = flat_rect(1, (4.0, -0.4), (4.5, 0.4), 0.0);
    let inst = biped_walk(vec![floor(0), far], vec![vec![0, 1]; 2], start(), 0.0, GoalSpec::free());
    let relax = build_sl1m(&inst).unwrap();
    assert_eq!(solve(&relax.lp, &SolveOptions::default()).unwrap().status, LpStatus::Optimal);
    let good = build_mi(&inst, default_big_m(&inst)).unwrap();
    assert_eq!(solve(&good.lp, &SolveOptions::default()).unwrap().status, LpStatus::Optimal);
    let tight = build_mi(&inst, 1.0).unwrap();
    assert_eq!(solve(&tight.lp, &SolveOptions::default()).unwrap().status, LpStatus::Infeasible);
    assert!(build_mi(&inst, 0.0).is_err());
}

#[test]
fn previous_indexing_builds_with_symmetric_relative_sets() {
    let mut inst = biped_walk(vec![floor(0), tilted(1, 0.3)], vec![vec![0, 1]; 3], start(), 0.0, GoalSpec::free());
    for e in &mut inst.effectors {
        e.relative = Polytope::axis_box(Vec3::new(-0.4, -0.4, -0.2), Vec3::new(0.4, 0.4, 0.2));
    }
    inst.build.relative = RelativeIndexing::Previous;
    let a = build_sl1m(&inst).unwrap();
    // Phase 1 uses the hard rows of the initial contact.
    let first: Vec<&RowTag> = a.ineq_tags.iter().filter(|t| t.kind == RowKind::RelativeFoot && t.phase == 1).collect();
    assert!(first.iter().all(|t| t.contact == 0));
    assert_eq!(first.len(), 6);
    let x = solve_ok(&a);
    assert!(x.iter().all(|v| v.is_finite()));
}

#[test]
fn instance_errors() {
    let mut inst = biped_walk(vec![floor(0)], vec![vec![0], vec![]], start(), 0.0, GoalSpec::free());
    assert_eq!(build_sl1m(&inst).unwrap_err(), Error::EmptyCandidates { phase: 2 });

    let steep = Surface::from_vertices(
        1,
        &[Vec3::new(1.0, -0.4, 0.0), Vec3::new(1.6, -0.4, 0.6), Vec3::new(1.6, 0.4, 0.6), Vec3::new(1.0, 0.4, 0.0)],
    )
    .unwrap();
    inst = biped_walk(vec![floor(0), steep], vec![vec![0], vec![0, 1]], start(), 0.0, GoalSpec::free());
    assert_eq!(build_sl1m(&inst).unwrap_err(), Error::NonQuasiFlatCandidate { phase: 2, surface: 1 });

    inst = biped_walk(vec![floor(0)], vec![vec![0]; 2], start(), 0.0, GoalSpec::free());
    inst.phases[1].effector = LEFT;
    assert!(matches!(build_sl1m(&inst), Err(Error::InvalidInstance(_))));

    inst = biped_walk(vec![floor(0)], vec![vec![0]; 2], Vec3::new(3.0, 0.0, 0.0), 0.0, GoalSpec::free());
    assert!(matches!(build_sl1m(&inst), Err(Error::InvalidInstance(_))));

    // A COM box beside the foot cannot be above the sole.
    inst = biped_walk(vec![floor(0)], vec![vec![0]; 2], start(), 0.0, GoalSpec::free());
    inst.initial.com = Some(Aabb::around(Vec3::new(1.0, 0.0, 0.8), Vec3::new(0.05, 0.05, 0.05)));
    assert_eq!(build_sl1m(&inst).unwrap_err(), Error::InfeasibleBoundary("initial"));

    inst.initial.com = None;
    let target = Aabb::around(Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.05, 0.05, 0.0));
    inst.goal = GoalSpec {
        kind: GoalKind::Targets { last: target, previous: None },
        com: Some(Aabb::around(Vec3::new(2.0, 0.0, 0.8), Vec3::new(0.1, 0.1, 0.1))),
    };
    assert_eq!(build_sl1m(&inst).unwrap_err(), Error::InfeasibleBoundary("goal"));
}

#[test]
fn goal_distance_term_adds_weighted_epigraph() {
    let surfaces = vec![floor(0), flat_rect(1, (0.35, -0.4), (0.9, 0.4), 0.0)];
    let mut inst =
        biped_walk(surfaces, vec![vec![0, 1]; 2], start(), 0.0, GoalSpec { kind: GoalKind::Surface(1), com: None });
    inst.linear_term = Some(LinearTerm::GoalDistance);
    inst.gamma = DEFAULT_GAMMA;
    let a = build_sl1m(&inst).unwrap();
    assert_eq!(a.layout.aux.len(), 6);
    assert!(a.layout.aux.clone().all(|j| a.lp.cost[j] == DEFAULT_GAMMA));
    assert_eq!(a.ineq_tags.iter().filter(|t| t.kind == RowKind::Objective).count(), 12);
    solve_ok(&a);
}

#[test]
fn biped_model_is_consistent() {
    for e in biped() {
        assert!(e.foot.is_xy_only());
        assert!(e.foot.contains(Vec3::ZERO, 0.0));
    }
}
