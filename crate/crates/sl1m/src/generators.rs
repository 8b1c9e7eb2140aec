//! The two benchmark families: a flat walk over split strips, and a
//! corridor of stepping stones with windowed candidate sets.

use serde::Deserialize;

use crate::scenario::{
    biped_effectors, BuildFile, CandidateKeyword, Candidates, GoalFile, GoalKindFile, InitialFile, LinearTermFile,
    PhaseFile, ScenarioFile, SolverDefaults, SurfaceFile, TargetFile, SCENARIO_VERSION,
};

pub const TOY_MAX_STEPS: usize = 38;
/// Gap left between neighbouring strips.
pub const TOY_GAP: f64 = 1e-3;
/// Half width of the toy floor across the walking direction.
pub const TOY_HALF_WIDTH: f64 = 0.3;
/// Floor length per step, plus a fixed margin.
const TOY_STEP_LENGTH: f64 = 0.2;
const TOY_MARGIN: f64 = 0.1;
/// Start of the right (support) foot.
pub const TOY_START: [f64; 3] = [0.05, -0.1, 0.0];

pub const CORRIDOR_PHASES: usize = 30;

/// Weight of the goal-distance term in both families.
pub const GOAL_WEIGHT: f64 = sl1m_core::problem::DEFAULT_GAMMA;

/// Walk of `steps` phases over a flat floor cut into `2^splits` strips
/// across the walking direction. Every strip is a candidate of every phase;
/// the walk starts on the first strip and ends with both feet on the last.
pub fn gen_toy(steps: usize, splits: u32) -> ScenarioFile {
    let n_strips = 1usize << splits;
    let length = TOY_STEP_LENGTH * steps as f64 + TOY_MARGIN;
    let width = length / n_strips as f64;
    let surfaces = (0..n_strips)
        .map(|j| {
            let lo = j as f64 * width;
            let hi = if j + 1 == n_strips { length } else { (j + 1) as f64 * width - TOY_GAP };
            let (y0, y1) = (-TOY_HALF_WIDTH, TOY_HALF_WIDTH);
            SurfaceFile { id: j, vertices: vec![[lo, y0, 0.0], [hi, y0, 0.0], [hi, y1, 0.0], [lo, y1, 0.0]] }
        })
        .collect();
    let phases = (0..steps)
        .map(|k| PhaseFile { effector: k % 2, yaw: 0.0, candidates: Candidates::Keyword(CandidateKeyword::All) })
        .collect();
    walk(surfaces, phases, TOY_START, GoalFile { kind: GoalKindFile::Surface { id: n_strips - 1 }, com: None })
}

fn walk(surfaces: Vec<SurfaceFile>, phases: Vec<PhaseFile>, start: [f64; 3], goal: GoalFile) -> ScenarioFile {
    ScenarioFile {
        version: SCENARIO_VERSION,
        surfaces,
        effectors: biped_effectors(),
        gait: vec![0, 1],
        phases,
        initial: InitialFile { position: start, effector: 1, yaw: 0.0, com: None },
        goal,
        mu: 0.5,
        gamma: GOAL_WEIGHT,
        linear_term: Some(LinearTermFile::GoalDistance),
        build: BuildFile::default(),
        solver: SolverDefaults::default(),
    }
}

#[derive(Deserialize)]
struct CorridorAsset {
    start: Pad,
    initial: [f64; 3],
    pads: Vec<Pad>,
}

#[derive(Deserialize)]
struct Pad {
    vertices: Vec<[f64; 3]>,
    #[serde(default)]
    target: [f64; 3],
}

const CORRIDOR_ASSET: &str = include_str!("../assets/corridor.json");
/// Goal tolerance around the target foot positions of the last two phases.
const CORRIDOR_GOAL_TOL: [f64; 3] = [0.05, 0.05, 0.05];

/// Corridor of stepping stones: surface 0 is the start pad and surface `k`
/// the stone of phase `k`. Phase `k` may use the stones of phases
/// `k - window ..= k + window`; only the first `phases` phases are kept and
/// the last two feet must land near their stones' targets.
pub fn gen_corridor(phases: usize, window: usize) -> ScenarioFile {
    let asset: CorridorAsset = serde_json::from_str(CORRIDOR_ASSET).expect("corridor asset parses");
    let n = phases.clamp(1, asset.pads.len());
    let mut surfaces = vec![SurfaceFile { id: 0, vertices: asset.start.vertices.clone() }];
    surfaces.extend(
        asset.pads.iter().take(n).enumerate().map(|(i, p)| SurfaceFile { id: i + 1, vertices: p.vertices.clone() }),
    );
    let phase_files = (1..=n)
        .map(|k| PhaseFile {
            effector: (k - 1) % 2,
            yaw: 0.0,
            candidates: Candidates::List((k.saturating_sub(window).max(1)..=(k + window).min(n)).collect()),
        })
        .collect();
    let target = |k: usize| TargetFile { point: asset.pads[k - 1].target, tolerance: CORRIDOR_GOAL_TOL };
    let goal = GoalFile {
        kind: GoalKindFile::Targets { last: target(n), previous: (n >= 2).then(|| target(n - 1)) },
        com: None,
    };
    walk(surfaces, phase_files, asset.initial, goal)
}
