//! Versioned JSON scenario files and their conversion to problem instances.
//!
//! Lengths are in metres and angles in radians. Polytopes are written as
//! explicit `rows`/`rhs` pairs except the foot shape, which is a polygon.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sl1m_core::geometry::{Aabb, Polytope, Surface, Vec3};
use sl1m_core::problem::{
    BuildOptions, EffectorModel, GoalKind, GoalSpec, InitialSpec, LinearTerm, PhaseSpec, ProblemInstance,
    RelativeIndexing,
};

use crate::error::{Error, Result};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub surfaces: Vec<SurfaceFile>,
    pub effectors: Vec<EffectorFile>,
    pub gait: Vec<usize>,
    pub phases: Vec<PhaseFile>,
    pub initial: InitialFile,
    pub goal: GoalFile,
    pub mu: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_term: Option<LinearTermFile>,
    #[serde(default)]
    pub build: BuildFile,
    #[serde(default)]
    pub solver: SolverDefaults,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub id: usize,
    pub vertices: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub rows: Vec<[f64; 3]>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectorFile {
    pub id: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    /// Sole outline in the foot frame.
    pub foot: Vec<[f64; 2]>,
    pub com: PolytopeFile,
    pub relative: PolytopeFile,
}

/// Candidate surfaces of a phase: explicit ids or every surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Candidates {
    List(Vec<usize>),
    Keyword(CandidateKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKeyword {
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseFile {
    pub effector: usize,
    pub yaw: f64,
    pub candidates: Candidates,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub point: [f64; 3],
    /// Half-extents of the tolerance box around `point`.
    pub tolerance: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFile {
    pub position: [f64; 3],
    pub effector: usize,
    pub yaw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub com: Option<BoxFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoalKindFile {
    Free,
    Surface {
        id: usize,
    },
    Targets {
        last: TargetFile,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        previous: Option<TargetFile>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalFile {
    #[serde(flatten)]
    pub kind: GoalKindFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub com: Option<BoxFile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearTermFile {
    GoalDistance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeFile {
    #[default]
    Current,
    Previous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildFile {
    pub simplify: bool,
    pub relative: RelativeFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
}

impl Default for BuildFile {
    fn default() -> Self {
        BuildFile { simplify: true, relative: RelativeFile::Current, big_m: None }
    }
}

/// Solver settings a scenario may carry; command-line flags override them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverDefaults {
    pub tol_zero: f64,
    pub max_combinations: usize,
    pub stop_at_first_feasible: bool,
    pub node_limit: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
    pub oracle_cap: usize,
}

impl Default for SolverDefaults {
    fn default() -> Self {
        SolverDefaults {
            tol_zero: 1e-6,
            max_combinations: 4000,
            stop_at_first_feasible: true,
            node_limit: 100_000,
            time_limit: None,
            oracle_cap: sl1m_core::oracle::DEFAULT_CAP,
        }
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::from_array(a)
}

impl BoxFile {
    pub fn to_aabb(self) -> Aabb {
        Aabb { lo: v3(self.lo), hi: v3(self.hi) }
    }

    pub fn from_aabb(b: &Aabb) -> Self {
        BoxFile { lo: b.lo.to_array(), hi: b.hi.to_array() }
    }
}

impl TargetFile {
    pub fn to_aabb(self) -> Aabb {
        Aabb::around(v3(self.point), v3(self.tolerance))
    }
}

impl PolytopeFile {
    pub fn to_polytope(&self) -> Result<Polytope> {
        if self.rows.len() != self.rhs.len() {
            return Err(Error::Format(format!(
                "polytope has {} rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        Ok(Polytope::new(self.rows.iter().map(|r| v3(*r)).collect(), self.rhs.clone()))
    }

    pub fn from_polytope(p: &Polytope) -> Self {
        PolytopeFile { rows: p.rows.iter().map(|r| r.to_array()).collect(), rhs: p.rhs.clone() }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let s: ScenarioFile = serde_json::from_str(text)?;
        if s.version != SCENARIO_VERSION {
            return Err(Error::Format(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                s.version
            )));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serialises");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let mut surfaces = Vec::with_capacity(self.surfaces.len());
        for (i, s) in self.surfaces.iter().enumerate() {
            if s.id != i {
                return Err(Error::Format(format!("surface at index {i} has id {}", s.id)));
            }
            let verts: Vec<Vec3> = s.vertices.iter().map(|v| v3(*v)).collect();
            surfaces.push(Surface::from_vertices(i, &verts).map_err(|e| Error::Surface(i, e))?);
        }
        let mut effectors = Vec::with_capacity(self.effectors.len());
        for e in &self.effectors {
            let outline: Vec<(f64, f64)> = e.foot.iter().map(|p| (p[0], p[1])).collect();
            effectors.push(EffectorModel {
                id: e.id,
                foot: Polytope::from_polygon_xy(&outline)?,
                com: e.com.to_polytope()?,
                relative: e.relative.to_polytope()?,
            });
        }
        let all: Vec<usize> = (0..surfaces.len()).collect();
        let phases = self
            .phases
            .iter()
            .map(|p| PhaseSpec {
                effector: p.effector,
                yaw: p.yaw,
                candidates: match &p.candidates {
                    Candidates::List(ids) => ids.clone(),
                    Candidates::Keyword(CandidateKeyword::All) => all.clone(),
                },
            })
            .collect();
        let kind = match &self.goal.kind {
            GoalKindFile::Free => GoalKind::Free,
            GoalKindFile::Surface { id } => GoalKind::Surface(*id),
            GoalKindFile::Targets { last, previous } => {
                GoalKind::Targets { last: last.to_aabb(), previous: previous.map(TargetFile::to_aabb) }
            }
        };
        let inst = ProblemInstance {
            surfaces,
            effectors,
            gait: self.gait.clone(),
            phases,
            initial: InitialSpec {
                position: v3(self.initial.position),
                effector: self.initial.effector,
                yaw: self.initial.yaw,
                com: self.initial.com.map(BoxFile::to_aabb),
            },
            goal: GoalSpec { kind, com: self.goal.com.map(BoxFile::to_aabb) },
            mu: self.mu,
            gamma: self.gamma,
            linear_term: self.linear_term.map(|LinearTermFile::GoalDistance| LinearTerm::GoalDistance),
            build: BuildOptions {
                simplify: self.build.simplify,
                relative: match self.build.relative {
                    RelativeFile::Current => RelativeIndexing::Current,
                    RelativeFile::Previous => RelativeIndexing::Previous,
                },
                big_m: self.build.big_m,
            },
        };
        inst.check()?;
        Ok(inst)
    }
}

/// Effector entries for the biped of [`sl1m_core::models`].
pub fn biped_effectors() -> Vec<EffectorFile> {
    use sl1m_core::models::{biped, FOOT_HALF, LEFT};
    let (hx, hy) = FOOT_HALF;
    biped()
        .iter()
        .map(|e| EffectorFile {
            id: e.id,
            name: if e.id == LEFT { "left".into() } else { "right".into() },
            foot: vec![[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]],
            com: PolytopeFile::from_polytope(&e.com),
            relative: PolytopeFile::from_polytope(&e.relative),
        })
        .collect()
}
