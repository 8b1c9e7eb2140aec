//! Problem instances and assembly of their linear programs.
//!
//! Contacts are numbered `l = 0..=N`: contact 0 is the fixed initial support
//! foot and contact `k >= 1` is the foot placed by phase `k`. During phase
//! `k` the two active contacts are `k - 1` and `k`, and the COM moves from
//! `c^{k,0}` (above contact `k - 1`) to `c^{k,1}` (above contact `k`).
//!
//! Three programs share one assembly routine:
//! * [`build_sl1m`], the relaxation where every candidate surface `i` of a
//!   phase carries a slack pair `(alpha_i, beta_i)` and the objective is the
//!   sum of the `alpha`;
//! * [`build_fixed`], the same constraints with one surface per phase and no
//!   slacks;
//! * [`build_mi`], a big-M encoding with one binary per candidate surface.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::geometry::{rotate_polytope, Aabb, Mat3, Polytope, Surface, Vec3};
use crate::lp::{check_feasible, LpProblem};
use crate::{Error, Result};

/// Tolerance for locating the initial foot on its surface.
pub const INITIAL_CONTACT_TOL: f64 = 1e-6;
/// Weight of the goal-distance term when one is requested without a weight.
pub const DEFAULT_GAMMA: f64 = 1e-3;

/// Kinematic model of one effector (a foot).
#[derive(Clone, Debug, PartialEq)]
pub struct EffectorModel {
    pub id: usize,
    /// Sole shape in the foot frame; rows have no z component.
    pub foot: Polytope,
    /// Reachable COM positions in the foot frame.
    pub com: Polytope,
    /// Position of this foot, when it is the one moving, relative to the
    /// support foot, expressed in this foot's frame.
    pub relative: Polytope,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpec {
    /// Effector that breaks contact and lands during this phase.
    pub effector: usize,
    pub yaw: f64,
    /// Candidate surface ids, in the order their slack variables are laid out.
    pub candidates: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    /// Position `p^0` of the first support foot.
    pub position: Vec3,
    pub effector: usize,
    pub yaw: f64,
    /// Optional box for the first COM point `c^{1,0}`.
    pub com: Option<Aabb>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GoalKind {
    /// No condition on the final contacts.
    Free,
    /// The last two contacts lie on this surface.
    Surface(usize),
    /// The last contact lies in `last`; the one before in `previous`.
    Targets { last: Aabb, previous: Option<Aabb> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoalSpec {
    pub kind: GoalKind,
    /// Optional box for the final COM point `c^{N,1}`.
    pub com: Option<Aabb>,
}

impl GoalSpec {
    pub fn free() -> GoalSpec {
        GoalSpec { kind: GoalKind::Free, com: None }
    }

    /// Point the goal-distance objective pulls the feet towards.
    pub fn anchor(&self, surfaces: &[Surface]) -> Option<Vec3> {
        match &self.kind {
            GoalKind::Free => None,
            GoalKind::Surface(id) => surfaces.get(*id).map(Surface::centroid),
            GoalKind::Targets { last, .. } => Some((last.lo + last.hi) * 0.5),
        }
    }
}

/// Which phase indexes the relative-foot constraint of phase `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RelativeIndexing {
    /// Polytope of the moving effector, in the frame of contact `k`, with
    /// the slacks of phase `k`.
    #[default]
    Current,
    /// Polytope of the support effector, in the frame of contact `k - 1`,
    /// with the slacks of phase `k - 1`.
    Previous,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    /// Emit the foot, COM and relative-foot rows of a contact once and
    /// without slack when all its candidate surfaces share one orientation.
    pub simplify: bool,
    pub relative: RelativeIndexing,
    /// Big-M constant of the mixed-integer encoding; `None` uses
    /// [`default_big_m`].
    pub big_m: Option<f64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { simplify: true, relative: RelativeIndexing::Current, big_m: None }
    }
}

/// Optional linear term `l(u)` added to the relaxation objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearTerm {
    /// L1 distance of every foot to the goal anchor.
    GoalDistance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    /// Surfaces, indexed by id.
    pub surfaces: Vec<Surface>,
    /// Effector models, indexed by id.
    pub effectors: Vec<EffectorModel>,
    /// Cyclic order in which effectors move.
    pub gait: Vec<usize>,
    pub phases: Vec<PhaseSpec>,
    pub initial: InitialSpec,
    pub goal: GoalSpec,
    pub mu: f64,
    pub gamma: f64,
    pub linear_term: Option<LinearTerm>,
    pub build: BuildOptions,
}

/// Objective of the fixed-assignment program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedObjective {
    /// Zero cost; no auxiliary variables.
    Feasibility,
    /// L1 distance of each foot to the centroid of its surface.
    Centering,
    /// L1 distance of each foot to the goal anchor.
    GoalDistance,
}

/// Position of every block of the variable vector.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableLayout {
    pub n_phases: usize,
    /// Candidate ids per phase, matching the order of the per-surface blocks.
    pub candidates: Vec<Vec<usize>>,
    /// Start of `p^1`; foot `l` occupies `p + 3 (l - 1) ..` .
    pub p: usize,
    /// Slacks `alpha^k` per phase (relaxation only).
    pub alpha: Vec<Range<usize>>,
    /// Slacks `beta^k` per phase (relaxation only).
    pub beta: Vec<Range<usize>>,
    /// Selection binaries per phase (mixed-integer program only).
    pub binary: Vec<Range<usize>>,
    pub c0: usize,
    pub c1: usize,
    pub aux: Range<usize>,
    pub n_vars: usize,
}

impl VariableLayout {
    pub(crate) fn new(candidates: Vec<Vec<usize>>, slacks: bool, binaries: bool, n_aux: usize) -> Self {
        let n = candidates.len();
        let mut next = 0;
        let mut take = |len: usize| {
            let r = next..next + len;
            next += len;
            r
        };
        let p = take(3 * n).start;
        let blocks = |take: &mut dyn FnMut(usize) -> Range<usize>, on: bool| -> Vec<Range<usize>> {
            candidates.iter().map(|c| if on { take(c.len()) } else { take(0) }).collect()
        };
        let alpha = blocks(&mut take, slacks);
        let beta = blocks(&mut take, slacks);
        let binary = blocks(&mut take, binaries);
        let c0 = take(3 * n).start;
        let c1 = take(3 * n).start;
        let aux = take(n_aux);
        VariableLayout { n_phases: n, candidates, p, alpha, beta, binary, c0, c1, aux: aux.clone(), n_vars: aux.end }
    }

    /// First index of foot `l >= 1`.
    pub fn foot(&self, l: usize) -> usize {
        debug_assert!(l >= 1 && l <= self.n_phases);
        self.p + 3 * (l - 1)
    }

    /// First index of `c^{k,m}`.
    pub fn com(&self, k: usize, m: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.n_phases && m < 2);
        (if m == 0 { self.c0 } else { self.c1 }) + 3 * (k - 1)
    }

    pub fn foot_value(&self, x: &[f64], l: usize) -> Vec3 {
        read3(x, self.foot(l))
    }

    pub fn com_value(&self, x: &[f64], k: usize, m: usize) -> Vec3 {
        read3(x, self.com(k, m))
    }

    /// `(surface id, alpha)` pairs of phase `k` from a relaxation solution.
    pub fn alphas(&self, x: &[f64], k: usize) -> Vec<(usize, f64)> {
        self.candidates[k - 1].iter().zip(self.alpha[k - 1].clone()).map(|(&s, j)| (s, x[j])).collect()
    }
}

fn read3(x: &[f64], at: usize) -> Vec3 {
    Vec3::new(x[at], x[at + 1], x[at + 2])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    /// Edge rows of a surface.
    SurfaceBoundary,
    /// Plane of a surface (an equality, or a pair of big-M rows).
    SurfacePlane,
    /// `-alpha <= beta <= alpha`.
    SlackCoupling,
    /// COM above the support polygon of a foot.
    Equilibrium,
    /// COM reachability from a foot.
    ComReach,
    /// Position of the moving foot relative to the support foot.
    RelativeFoot,
    /// Initial COM box.
    InitialCom,
    /// Goal surface or target box of a final contact.
    Goal,
    /// Goal COM box.
    GoalCom,
    /// One surface per phase in the mixed-integer program.
    Selection,
    /// Epigraph rows of L1 objective terms.
    Objective,
}

/// Provenance of a row, used by validation reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowTag {
    pub kind: RowKind,
    /// Phase the row belongs to (0 for initial conditions).
    pub phase: usize,
    /// Contact whose frame or surface defines the row.
    pub contact: usize,
    pub surface: Option<usize>,
}

/// An assembled program with its layout and row provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembled {
    pub lp: LpProblem,
    pub layout: VariableLayout,
    pub ineq_tags: Vec<RowTag>,
    pub eq_tags: Vec<RowTag>,
}

/// The relaxation with L1 slack objective.
pub fn build_sl1m(inst: &ProblemInstance) -> Result<Assembled> {
    let ctx = Context::new(inst)?;
    let modes = (0..=ctx.n).map(|l| ctx.relaxed_mode(l)).collect::<Vec<_>>();
    let n_aux = if inst.linear_term.is_some() { 3 * ctx.n } else { 0 };
    let layout = VariableLayout::new(ctx.candidates(), true, false, n_aux);
    let mut b = Builder::new(&ctx, layout, modes, Encoding::Slack);
    for k in 1..=ctx.n {
        b.surface_block(k);
        b.phase_rows(k);
    }
    b.boundary_rows();
    for r in b.layout.alpha.clone() {
        r.for_each(|j| b.lp.cost[j] = 1.0);
    }
    for r in b.layout.beta.clone() {
        r.for_each(|j| b.lp.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY));
    }
    for r in b.layout.alpha.clone() {
        r.for_each(|j| b.lp.set_bounds(j, 0.0, f64::INFINITY));
    }
    if let Some(LinearTerm::GoalDistance) = inst.linear_term {
        let anchor = inst
            .goal
            .anchor(&inst.surfaces)
            .ok_or_else(|| Error::InvalidInstance("goal-distance term needs a goal surface or target".into()))?;
        b.l1_term(&|_| anchor, inst.gamma);
    }
    Ok(b.finish())
}

/// The program with phase `k` committed to `assignment[k - 1]`.
pub fn build_fixed(inst: &ProblemInstance, assignment: &[usize], objective: FixedObjective) -> Result<Assembled> {
    let ctx = Context::new(inst)?;
    if assignment.len() != ctx.n {
        return Err(Error::InvalidInstance(format!(
            "assignment has {} entries for {} phases",
            assignment.len(),
            ctx.n
        )));
    }
    for (k, (&s, phase)) in assignment.iter().zip(&inst.phases).enumerate() {
        if !phase.candidates.contains(&s) {
            return Err(Error::InvalidAssignment { phase: k + 1, surface: s });
        }
    }
    let mut modes = vec![Mode::Hard(ctx.initial_surface)];
    modes.extend(assignment.iter().map(|&s| Mode::Hard(s)));
    let n_aux = if objective == FixedObjective::Feasibility { 0 } else { 3 * ctx.n };
    let candidates = assignment.iter().map(|&s| vec![s]).collect();
    let layout = VariableLayout::new(candidates, false, false, n_aux);
    let mut b = Builder::new(&ctx, layout, modes, Encoding::Hard);
    for k in 1..=ctx.n {
        b.surface_block(k);
        b.phase_rows(k);
    }
    b.boundary_rows();
    match objective {
        FixedObjective::Feasibility => {}
        FixedObjective::Centering => {
            let centers: Vec<Vec3> = assignment.iter().map(|&s| inst.surfaces[s].centroid()).collect();
            b.l1_term(&|l| centers[l - 1], 1.0);
        }
        FixedObjective::GoalDistance => {
            let anchor = inst
                .goal
                .anchor(&inst.surfaces)
                .ok_or_else(|| Error::InvalidInstance("goal-distance objective needs a goal".into()))?;
            let gamma = if inst.gamma > 0.0 { inst.gamma } else { DEFAULT_GAMMA };
            b.l1_term(&|_| anchor, gamma);
        }
    }
    Ok(b.finish())
}

/// Big-M mixed-integer program; the binaries are `layout.binary`, relaxed
/// here to `[0, 1]`.
pub fn build_mi(inst: &ProblemInstance, big_m: f64) -> Result<Assembled> {
    if !(big_m > 0.0 && big_m.is_finite()) {
        return Err(Error::InvalidInstance(format!("big-M must be positive, got {big_m}")));
    }
    let ctx = Context::new(inst)?;
    let modes = (0..=ctx.n).map(|l| ctx.relaxed_mode(l)).collect();
    let n_aux = if inst.linear_term.is_some() { 3 * ctx.n } else { 0 };
    let layout = VariableLayout::new(ctx.candidates(), false, true, n_aux);
    let mut b = Builder::new(&ctx, layout, modes, Encoding::BigM(big_m));
    for k in 1..=ctx.n {
        b.surface_block(k);
        b.phase_rows(k);
    }
    b.boundary_rows();
    for k in 1..=ctx.n {
        let ys = b.layout.binary[k - 1].clone();
        for j in ys.clone() {
            b.lp.set_bounds(j, 0.0, 1.0);
        }
        let row: Vec<(usize, f64)> = ys.map(|j| (j, 1.0)).collect();
        b.eq(&row, 1.0, RowTag { kind: RowKind::Selection, phase: k, contact: k, surface: None });
    }
    if let Some(LinearTerm::GoalDistance) = inst.linear_term {
        let anchor = inst
            .goal
            .anchor(&inst.surfaces)
            .ok_or_else(|| Error::InvalidInstance("goal-distance term needs a goal surface or target".into()))?;
        b.l1_term(&|_| anchor, inst.gamma);
    }
    Ok(b.finish())
}

/// Twice the diameter of the bounding box of every surface vertex and `p^0`.
pub fn default_big_m(inst: &ProblemInstance) -> f64 {
    let mut lo = inst.initial.position;
    let mut hi = inst.initial.position;
    for v in inst.surfaces.iter().flat_map(|s| &s.vertices) {
        lo = Vec3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
        hi = Vec3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
    }
    2.0 * (hi - lo).norm()
}

impl ProblemInstance {
    pub fn n_phases(&self) -> usize {
        self.phases.len()
    }

    /// Effector in contact at contact `l`.
    pub fn effector_at(&self, l: usize) -> usize {
        if l == 0 {
            self.initial.effector
        } else {
            self.phases[l - 1].effector
        }
    }

    pub fn yaw_at(&self, l: usize) -> f64 {
        if l == 0 {
            self.initial.yaw
        } else {
            self.phases[l - 1].yaw
        }
    }

    /// Lowest-id surface holding the initial foot.
    pub fn initial_surface(&self) -> Option<usize> {
        self.surfaces.iter().position(|s| s.contains(self.initial.position, INITIAL_CONTACT_TOL))
    }

    /// Number of assignments, saturating.
    pub fn combinations(&self) -> u128 {
        self.phases.iter().fold(1u128, |acc, p| acc.saturating_mul(p.candidates.len() as u128))
    }

    /// Structural checks shared by every builder.
    pub fn check(&self) -> Result<()> {
        Context::new(self).map(|_| ())
    }
}

/// Validated view of an instance.
struct Context<'a> {
    inst: &'a ProblemInstance,
    n: usize,
    initial_surface: usize,
}

impl<'a> Context<'a> {
    fn new(inst: &'a ProblemInstance) -> Result<Self> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidInstance(msg));
        let n = inst.phases.len();
        if n == 0 {
            return bad("instance has no phase".into());
        }
        if !(inst.mu > 0.0) || !(inst.gamma >= 0.0) {
            return bad(format!("mu must be positive and gamma nonnegative (mu {}, gamma {})", inst.mu, inst.gamma));
        }
        for (id, s) in inst.surfaces.iter().enumerate() {
            if s.id != id {
                return bad(format!("surface at index {id} has id {}", s.id));
            }
        }
        for (id, e) in inst.effectors.iter().enumerate() {
            if e.id != id {
                return bad(format!("effector at index {id} has id {}", e.id));
            }
            if e.foot.is_empty() || e.com.is_empty() || e.relative.is_empty() {
                return bad(format!("effector {id} has an empty polytope"));
            }
            if !e.foot.is_xy_only() {
                return bad(format!("foot shape of effector {id} has z coefficients"));
            }
            if !e.foot.contains(Vec3::ZERO, 0.0) {
                return bad(format!("foot shape of effector {id} excludes its origin"));
            }
        }
        if inst.gait.is_empty() || inst.gait.iter().any(|&j| j >= inst.effectors.len()) {
            return bad("gait references an unknown effector".into());
        }
        let Some(start) = inst.gait.iter().position(|&j| j == inst.initial.effector) else {
            return bad(format!("initial effector {} is not in the gait", inst.initial.effector));
        };
        for (k0, phase) in inst.phases.iter().enumerate() {
            let k = k0 + 1;
            let expected = inst.gait[(start + k) % inst.gait.len()];
            if phase.effector != expected {
                return bad(format!("phase {k} moves effector {} but the gait expects {expected}", phase.effector));
            }
            if phase.candidates.is_empty() {
                return Err(Error::EmptyCandidates { phase: k });
            }
            for (idx, &s) in phase.candidates.iter().enumerate() {
                let Some(surface) = inst.surfaces.get(s) else {
                    return bad(format!("phase {k} references unknown surface {s}"));
                };
                if phase.candidates[..idx].contains(&s) {
                    return bad(format!("phase {k} lists surface {s} twice"));
                }
                if !surface.is_quasi_flat(inst.mu) {
                    return Err(Error::NonQuasiFlatCandidate { phase: k, surface: s });
                }
            }
            if !phase.yaw.is_finite() {
                return bad(format!("phase {k} has a non-finite yaw"));
            }
        }
        let Some(initial_surface) = inst.initial_surface() else {
            return bad("initial foot position lies on no surface".into());
        };
        if !inst.surfaces[initial_surface].is_quasi_flat(inst.mu) {
            return bad("initial surface is not quasi-flat".into());
        }
        if let GoalKind::Surface(g) = inst.goal.kind {
            match inst.surfaces.get(g) {
                None => return bad(format!("goal surface {g} does not exist")),
                Some(s) if !s.is_quasi_flat(inst.mu) => return bad(format!("goal surface {g} is not quasi-flat")),
                _ => {}
            }
        }
        let ctx = Context { inst, n, initial_surface };
        ctx.check_boundaries()?;
        Ok(ctx)
    }

    fn candidates(&self) -> Vec<Vec<usize>> {
        self.inst.phases.iter().map(|p| p.candidates.clone()).collect()
    }

    fn relaxed_mode(&self, l: usize) -> Mode {
        if l == 0 {
            return Mode::Hard(self.initial_surface);
        }
        let cands = &self.inst.phases[l - 1].candidates;
        let first = &self.inst.surfaces[cands[0]];
        let uniform = cands.iter().all(|&s| self.inst.surfaces[s].same_orientation(first));
        if cands.len() == 1 || (self.inst.build.simplify && uniform) {
            Mode::Hard(cands[0])
        } else {
            Mode::Select
        }
    }

    fn effector(&self, l: usize) -> &EffectorModel {
        &self.inst.effectors[self.inst.effector_at(l)]
    }

    /// Each boundary set, taken alone, must admit a point.
    fn check_boundaries(&self) -> Result<()> {
        let inst = self.inst;
        let boxes = [inst.initial.com, inst.goal.com].into_iter().flatten().chain(match &inst.goal.kind {
            GoalKind::Targets { last, previous } => {
                let mut v = vec![*last];
                v.extend(previous);
                v
            }
            _ => Vec::new(),
        });
        for b in boxes {
            let ok = b.lo.is_finite() && b.hi.is_finite() && b.lo.x <= b.hi.x && b.lo.y <= b.hi.y && b.lo.z <= b.hi.z;
            if !ok {
                return Err(Error::InfeasibleBoundary("boundary box"));
            }
        }
        if let Some(com) = inst.initial.com {
            // c^{1,0} must sit above the initial foot and within its reach.
            let p0 = inst.initial.position;
            let eff = self.effector(0);
            let frame = inst.surfaces[self.initial_surface].frame(inst.initial.yaw);
            let mut lp = LpProblem::new(3);
            add_polytope(&mut lp, &com.to_polytope(), Vec3::ZERO);
            add_polytope(&mut lp, &rotate_polytope(&eff.foot, inst.initial.yaw), p0);
            add_polytope(&mut lp, &eff.com.transformed(&frame), p0);
            if !check_feasible(&lp)?.feasible {
                return Err(Error::InfeasibleBoundary("initial"));
            }
        }
        if let (GoalKind::Targets { last, .. }, Some(com)) = (&inst.goal.kind, inst.goal.com) {
            // variables: p^N then c^{N,1}
            let eff = self.effector(self.n);
            let foot = rotate_polytope(&eff.foot, inst.yaw_at(self.n));
            let mut lp = LpProblem::new(6);
            for (a, b) in last.to_polytope().rows.iter().zip(last.to_polytope().rhs) {
                lp.add_le(&[(0, a.x), (1, a.y), (2, a.z)], b);
            }
            for (a, b) in com.to_polytope().rows.iter().zip(com.to_polytope().rhs) {
                lp.add_le(&[(3, a.x), (4, a.y), (5, a.z)], b);
            }
            for (a, &b) in foot.rows.iter().zip(&foot.rhs) {
                lp.add_le(&[(3, a.x), (4, a.y), (0, -a.x), (1, -a.y)], b);
            }
            if !check_feasible(&lp)?.feasible {
                return Err(Error::InfeasibleBoundary("goal"));
            }
        }
        Ok(())
    }
}

/// Adds `A (x - origin) <= b` over a three-variable problem.
fn add_polytope(lp: &mut LpProblem, p: &Polytope, origin: Vec3) {
    for (a, &b) in p.rows.iter().zip(&p.rhs) {
        lp.add_le(&[(0, a.x), (1, a.y), (2, a.z)], b + a.dot(origin));
    }
}

/// How the per-surface rows of a contact are emitted.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Mode {
    /// Once, without slack, in the frame of this surface.
    Hard(usize),
    /// Once per candidate surface, relaxed by that surface's selector.
    Select,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Encoding {
    Hard,
    Slack,
    BigM(f64),
}

/// A point of the plan: a block of three variables or a constant.
#[derive(Clone, Copy)]
enum Point {
    Var(usize),
    Const(Vec3),
}

/// Which transform carries a polytope into the world frame.
#[derive(Clone, Copy, PartialEq)]
enum FrameKind {
    /// Yaw only (foot shapes, which constrain xy).
    Yaw,
    /// Yaw, then the surface's roll and pitch.
    Surface,
}

struct Builder<'c, 'a> {
    ctx: &'c Context<'a>,
    layout: VariableLayout,
    modes: Vec<Mode>,
    encoding: Encoding,
    lp: LpProblem,
    ineq_tags: Vec<RowTag>,
    eq_tags: Vec<RowTag>,
}

impl<'c, 'a> Builder<'c, 'a> {
    fn new(ctx: &'c Context<'a>, layout: VariableLayout, modes: Vec<Mode>, encoding: Encoding) -> Self {
        let lp = LpProblem::new(layout.n_vars);
        Builder { ctx, layout, modes, encoding, lp, ineq_tags: Vec::new(), eq_tags: Vec::new() }
    }

    fn finish(self) -> Assembled {
        Assembled { lp: self.lp, layout: self.layout, ineq_tags: self.ineq_tags, eq_tags: self.eq_tags }
    }

    fn le(&mut self, row: &[(usize, f64)], rhs: f64, tag: RowTag) {
        self.lp.add_le(row, rhs);
        self.ineq_tags.push(tag);
    }

    fn eq(&mut self, row: &[(usize, f64)], rhs: f64, tag: RowTag) {
        self.lp.add_eq(row, rhs);
        self.eq_tags.push(tag);
    }

    fn foot(&self, l: usize) -> Point {
        if l == 0 {
            Point::Const(self.ctx.inst.initial.position)
        } else {
            Point::Var(self.layout.foot(l))
        }
    }

    /// Selector column of surface `idx` of phase `k`, with the sign it takes
    /// on the left-hand side of a relaxed row, and the rhs shift.
    fn selector(&self, k: usize, idx: usize) -> ((usize, f64), f64) {
        match self.encoding {
            Encoding::Slack => ((self.layout.alpha[k - 1].start + idx, -1.0), 0.0),
            Encoding::BigM(m) => ((self.layout.binary[k - 1].start + idx, m), m),
            Encoding::Hard => unreachable!("fixed programs have no selectors"),
        }
    }

    /// Row `a . (plus - minus) <= b` with optional extra entries.
    fn diff_row(&mut self, a: Vec3, plus: Point, minus: Point, b: f64, extra: &[(usize, f64)], tag: RowTag) {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(6 + extra.len());
        let mut rhs = b;
        for (pt, s) in [(plus, 1.0), (minus, -1.0)] {
            match pt {
                Point::Var(j) => row.extend([(j, s * a.x), (j + 1, s * a.y), (j + 2, s * a.z)]),
                Point::Const(c) => rhs -= s * a.dot(c),
            }
        }
        row.extend_from_slice(extra);
        self.le(&row, rhs, tag);
    }

    /// Rows of `polytope(effector at l)` in the frame of contact `l`, applied
    /// to `plus - minus`, emitted according to the contact's mode.
    #[allow(clippy::too_many_arguments)]
    fn contact_rows(
        &mut self,
        phase: usize,
        l: usize,
        kind: RowKind,
        frame: FrameKind,
        pick: fn(&EffectorModel) -> &Polytope,
        plus: Point,
        minus: Point,
    ) {
        let inst = self.ctx.inst;
        let local = pick(self.ctx.effector(l));
        let yaw = inst.yaw_at(l);
        let world = |s: usize| match frame {
            FrameKind::Yaw => rotate_polytope(local, yaw),
            FrameKind::Surface => local.transformed(&inst.surfaces[s].frame(yaw)),
        };
        match self.modes[l] {
            Mode::Hard(s) => {
                let p = world(s);
                // Rows shared by all candidates of a simplified contact name no surface.
                let committed = l == 0 || self.encoding == Encoding::Hard || self.layout.candidates[l - 1].len() == 1;
                let tag = RowTag { kind, phase, contact: l, surface: committed.then_some(s) };
                for (a, &b) in p.rows.iter().zip(&p.rhs) {
                    self.diff_row(*a, plus, minus, b, &[], tag);
                }
            }
            Mode::Select => {
                let cands = self.layout.candidates[l - 1].clone();
                for (idx, &s) in cands.iter().enumerate() {
                    let p = world(s);
                    let (sel, shift) = self.selector(l, idx);
                    let tag = RowTag { kind, phase, contact: l, surface: Some(s) };
                    for (a, &b) in p.rows.iter().zip(&p.rhs) {
                        self.diff_row(*a, plus, minus, b + shift, &[sel], tag);
                    }
                }
            }
        }
    }

    /// Surface membership rows of foot `k`.
    fn surface_block(&mut self, k: usize) {
        let inst = self.ctx.inst;
        let pk = self.layout.foot(k);
        let cands = self.layout.candidates[k - 1].clone();
        for (idx, &s) in cands.iter().enumerate() {
            let surf = &inst.surfaces[s];
            let tag = |kind| RowTag { kind, phase: k, contact: k, surface: Some(s) };
            let d = surf.normal;
            let plane = [(pk, d.x), (pk + 1, d.y), (pk + 2, d.z)];
            match self.encoding {
                Encoding::Hard => {
                    for (a, &b) in surf.boundary.rows.iter().zip(&surf.boundary.rhs) {
                        self.diff_row(
                            *a,
                            Point::Var(pk),
                            Point::Const(Vec3::ZERO),
                            b,
                            &[],
                            tag(RowKind::SurfaceBoundary),
                        );
                    }
                    self.eq(&plane, surf.offset, tag(RowKind::SurfacePlane));
                }
                Encoding::Slack => {
                    let alpha = self.layout.alpha[k - 1].start + idx;
                    let beta = self.layout.beta[k - 1].start + idx;
                    for (a, &b) in surf.boundary.rows.iter().zip(&surf.boundary.rhs) {
                        self.diff_row(
                            *a,
                            Point::Var(pk),
                            Point::Const(Vec3::ZERO),
                            b,
                            &[(alpha, -1.0)],
                            tag(RowKind::SurfaceBoundary),
                        );
                    }
                    let mut row = plane.to_vec();
                    row.push((beta, -1.0));
                    self.eq(&row, surf.offset, tag(RowKind::SurfacePlane));
                    self.le(&[(beta, 1.0), (alpha, -1.0)], 0.0, tag(RowKind::SlackCoupling));
                    self.le(&[(beta, -1.0), (alpha, -1.0)], 0.0, tag(RowKind::SlackCoupling));
                }
                Encoding::BigM(m) => {
                    let y = self.layout.binary[k - 1].start + idx;
                    for (a, &b) in surf.boundary.rows.iter().zip(&surf.boundary.rhs) {
                        self.diff_row(
                            *a,
                            Point::Var(pk),
                            Point::Const(Vec3::ZERO),
                            b + m,
                            &[(y, m)],
                            tag(RowKind::SurfaceBoundary),
                        );
                    }
                    for s in [1.0, -1.0] {
                        self.diff_row(
                            d * s,
                            Point::Var(pk),
                            Point::Const(Vec3::ZERO),
                            s * surf.offset + m,
                            &[(y, m)],
                            tag(RowKind::SurfacePlane),
                        );
                    }
                }
            }
        }
    }

    /// Equilibrium, relative-foot and COM reachability rows of phase `k`.
    fn phase_rows(&mut self, k: usize) {
        let (prev, cur) = (self.foot(k - 1), self.foot(k));
        let c0 = Point::Var(self.layout.com(k, 0));
        let c1 = Point::Var(self.layout.com(k, 1));
        self.contact_rows(k, k - 1, RowKind::Equilibrium, FrameKind::Yaw, |e| &e.foot, c0, prev);
        self.contact_rows(k, k, RowKind::Equilibrium, FrameKind::Yaw, |e| &e.foot, c1, cur);
        let q_contact = match self.ctx.inst.build.relative {
            RelativeIndexing::Current => k,
            RelativeIndexing::Previous => k - 1,
        };
        self.contact_rows(k, q_contact, RowKind::RelativeFoot, FrameKind::Surface, |e| &e.relative, cur, prev);
        for l in [k - 1, k] {
            let foot = self.foot(l);
            for c in [c0, c1] {
                self.contact_rows(k, l, RowKind::ComReach, FrameKind::Surface, |e| &e.com, c, foot);
            }
        }
    }

    fn box_rows(&mut self, at: usize, b: &Aabb, tag: RowTag) {
        let p = b.to_polytope();
        for (a, &r) in p.rows.iter().zip(&p.rhs) {
            self.diff_row(*a, Point::Var(at), Point::Const(Vec3::ZERO), r, &[], tag);
        }
    }

    fn boundary_rows(&mut self) {
        let inst = self.ctx.inst;
        let n = self.ctx.n;
        if let Some(com) = &inst.initial.com {
            let tag = RowTag { kind: RowKind::InitialCom, phase: 1, contact: 0, surface: None };
            self.box_rows(self.layout.com(1, 0), com, tag);
        }
        match &inst.goal.kind {
            GoalKind::Free => {}
            GoalKind::Surface(g) => {
                let surf = &inst.surfaces[*g];
                for l in [n - 1, n] {
                    if l == 0 {
                        continue;
                    }
                    let tag = RowTag { kind: RowKind::Goal, phase: l, contact: l, surface: Some(*g) };
                    let pl = self.layout.foot(l);
                    for (a, &b) in surf.boundary.rows.iter().zip(&surf.boundary.rhs) {
                        self.diff_row(*a, Point::Var(pl), Point::Const(Vec3::ZERO), b, &[], tag);
                    }
                    let d = surf.normal;
                    self.eq(&[(pl, d.x), (pl + 1, d.y), (pl + 2, d.z)], surf.offset, tag);
                }
            }
            GoalKind::Targets { last, previous } => {
                let tag = RowTag { kind: RowKind::Goal, phase: n, contact: n, surface: None };
                self.box_rows(self.layout.foot(n), last, tag);
                if let (Some(prev), true) = (previous, n >= 2) {
                    let tag = RowTag { kind: RowKind::Goal, phase: n - 1, contact: n - 1, surface: None };
                    self.box_rows(self.layout.foot(n - 1), prev, tag);
                }
            }
        }
        if let Some(com) = &inst.goal.com {
            let tag = RowTag { kind: RowKind::GoalCom, phase: n, contact: n, surface: None };
            self.box_rows(self.layout.com(n, 1), com, tag);
        }
    }

    /// `weight * sum_l |p^l - target(l)|_1` through epigraph variables.
    fn l1_term(&mut self, target: &dyn Fn(usize) -> Vec3, weight: f64) {
        let aux = self.layout.aux.start;
        for l in 1..=self.ctx.n {
            let p = self.layout.foot(l);
            let t = aux + 3 * (l - 1);
            let g = target(l).to_array();
            let tag = RowTag { kind: RowKind::Objective, phase: l, contact: l, surface: None };
            for axis in 0..3 {
                self.le(&[(p + axis, 1.0), (t + axis, -1.0)], g[axis], tag);
                self.le(&[(p + axis, -1.0), (t + axis, -1.0)], -g[axis], tag);
                self.lp.cost[t + axis] = weight;
            }
        }
    }
}

/// Frame of contact `l` on surface `s`, for reporting and validation.
pub fn contact_frame(inst: &ProblemInstance, l: usize, s: usize) -> Mat3 {
    inst.surfaces[s].frame(inst.yaw_at(l))
}

#[cfg(test)]
mod tests;
