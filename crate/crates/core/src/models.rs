//! A small biped model and helpers for building walking instances with it.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Polytope, Surface, Vec3};
use crate::problem::{BuildOptions, EffectorModel, GoalSpec, InitialSpec, PhaseSpec, ProblemInstance};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Sole half-extents along x and y.
pub const FOOT_HALF: (f64, f64) = (0.10, 0.05);

/// Left and right feet of a biped about 0.8 m tall.
///
/// The COM stays 0.7 to 0.9 m above the sole and within 0.3 m of each foot
/// horizontally; a step moves the foot at most 0.4 m along its heading and
/// keeps the feet 0.12 to 0.4 m apart sideways.
pub fn biped() -> Vec<EffectorModel> {
    let foot = Polytope::xy_rect((-FOOT_HALF.0, -FOOT_HALF.1), (FOOT_HALF.0, FOOT_HALF.1));
    let com = |y: (f64, f64)| Polytope::axis_box(Vec3::new(-0.3, y.0, 0.7), Vec3::new(0.3, y.1, 0.9));
    let rel = |y: (f64, f64)| Polytope::axis_box(Vec3::new(-0.4, y.0, -0.2), Vec3::new(0.4, y.1, 0.2));
    vec![
        EffectorModel { id: LEFT, foot: foot.clone(), com: com((-0.3, 0.05)), relative: rel((0.12, 0.4)) },
        EffectorModel { id: RIGHT, foot, com: com((-0.05, 0.3)), relative: rel((-0.4, -0.12)) },
    ]
}

/// A biped walk of `candidates.len()` phases starting with the right foot
/// at `start` and the left foot moving first; every heading is `yaw`.
pub fn biped_walk(
    surfaces: Vec<Surface>,
    candidates: Vec<Vec<usize>>,
    start: Vec3,
    yaw: f64,
    goal: GoalSpec,
) -> ProblemInstance {
    let phases = candidates
        .into_iter()
        .enumerate()
        .map(|(k, candidates)| PhaseSpec { effector: if k % 2 == 0 { LEFT } else { RIGHT }, yaw, candidates })
        .collect();
    ProblemInstance {
        surfaces,
        effectors: biped(),
        gait: vec![LEFT, RIGHT],
        phases,
        initial: InitialSpec { position: start, effector: RIGHT, yaw, com: None },
        goal,
        mu: 0.5,
        gamma: 0.0,
        linear_term: None,
        build: BuildOptions::default(),
    }
}

/// Axis-aligned horizontal rectangle at height `z`.
pub fn flat_rect(id: usize, lo: (f64, f64), hi: (f64, f64), z: f64) -> Surface {
    Surface::from_vertices(
        id,
        &[Vec3::new(lo.0, lo.1, z), Vec3::new(hi.0, lo.1, z), Vec3::new(hi.0, hi.1, z), Vec3::new(lo.0, hi.1, z)],
    )
    .expect("an axis-aligned rectangle is a valid surface")
}
