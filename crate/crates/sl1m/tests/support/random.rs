//! Seeded random planning instances: up to six phases, up to four candidates
//! per phase, over a handful of flat or slightly sloped rectangles.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sl1m_core::geometry::{Aabb, Surface, Vec3};
use sl1m_core::models::{biped_walk, flat_rect};
use sl1m_core::problem::{GoalKind, GoalSpec};
use sl1m_core::ProblemInstance;

pub const MAX_PHASES: usize = 6;
pub const MAX_CANDIDATES: usize = 4;

fn rect(rng: &mut ChaCha8Rng, id: usize, x_max: f64) -> Surface {
    let cx = rng.gen_range(-0.1..x_max);
    let cy = rng.gen_range(-0.35..0.35);
    let (hx, hy) = (rng.gen_range(0.04..0.3), rng.gen_range(0.04..0.3));
    let z = *[0.0, 0.0, 0.05, 0.1, 0.2].choose(rng).unwrap();
    if rng.gen_bool(0.25) {
        let slope = rng.gen_range(-0.25..0.25);
        let h = |x: f64| z + slope * (x - cx);
        let v = [
            Vec3::new(cx - hx, cy - hy, h(cx - hx)),
            Vec3::new(cx + hx, cy - hy, h(cx + hx)),
            Vec3::new(cx + hx, cy + hy, h(cx + hx)),
            Vec3::new(cx - hx, cy + hy, h(cx - hx)),
        ];
        Surface::from_vertices(id, &v).unwrap()
    } else {
        flat_rect(id, (cx - hx, cy - hy), (cx + hx, cy + hy), z)
    }
}

/// A valid instance; whether it is feasible is left to chance.
pub fn random_instance(rng: &mut ChaCha8Rng) -> ProblemInstance {
    let n = rng.gen_range(1..=MAX_PHASES);
    let m = rng.gen_range(2..=6);
    let mut surfaces = vec![flat_rect(0, (-0.2, -0.35), (0.15, 0.15), 0.0)];
    let x_max = 0.2 * n as f64 + 0.2;
    surfaces.extend((1..=m).map(|id| rect(rng, id, x_max)));
    let ids: Vec<usize> = (0..surfaces.len()).collect();
    let candidates = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=MAX_CANDIDATES.min(ids.len()));
            ids.choose_multiple(rng, k).copied().collect()
        })
        .collect();
    let goal = if rng.gen_bool(0.5) {
        GoalSpec::free()
    } else {
        GoalSpec { kind: GoalKind::Surface(rng.gen_range(0..surfaces.len())), com: None }
    };
    let yaw = if rng.gen_bool(0.3) { rng.gen_range(-0.4..0.4) } else { 0.0 };
    let mut inst = biped_walk(surfaces, candidates, Vec3::new(0.0, -0.1, 0.0), yaw, goal);
    inst.build.simplify = rng.gen_bool(0.5);
    if rng.gen_bool(0.3) {
        inst.initial.com = Some(Aabb::around(Vec3::new(0.0, 0.0, 0.75), Vec3::new(0.2, 0.2, 0.2)));
    }
    inst
}
