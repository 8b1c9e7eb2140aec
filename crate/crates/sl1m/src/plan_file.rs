//! Versioned JSON plan files.
//!
//! Everything except the `timing` object is a deterministic function of the
//! scenario and solver settings, so [`PlanFile::canonical`] is what tests
//! compare across runs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sl1m_core::geometry::Vec3;
use sl1m_core::{PhasePlan, Plan, PlanStatus, SolveStats, SolverKind};

use crate::error::{Error, Result};

pub const PLAN_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub version: u32,
    pub solver: String,
    pub status: String,
    pub assignment: Vec<usize>,
    pub phases: Vec<PhaseFile>,
    /// `(surface, alpha)` pairs per phase, smallest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<Vec<(usize, f64)>>,
    pub stats: StatsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseFile {
    pub surface: usize,
    pub foot: [f64; 3],
    pub com: [[f64; 3]; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsFile {
    pub lp_solves: usize,
    pub simplex_iterations: usize,
    pub combinations_tried: usize,
    pub nodes: usize,
    pub iteration_limit_hit: bool,
    pub unresolved_phases: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingFile {
    pub solve_time: f64,
}

pub fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Sl1m => "sl1m",
        SolverKind::Mi => "mi",
        SolverKind::Oracle => "oracle",
    }
}

pub fn parse_solver(s: &str) -> Option<SolverKind> {
    [SolverKind::Sl1m, SolverKind::Mi, SolverKind::Oracle].into_iter().find(|k| solver_name(*k) == s)
}

const STATUSES: [PlanStatus; 6] = [
    PlanStatus::SparseDirect,
    PlanStatus::FixedAfterFallback,
    PlanStatus::Feasible,
    PlanStatus::Infeasible,
    PlanStatus::CombinatorialExhausted,
    PlanStatus::Incomplete,
];

pub fn status_name(s: PlanStatus) -> &'static str {
    match s {
        PlanStatus::SparseDirect => "sparse_direct",
        PlanStatus::FixedAfterFallback => "fixed_after_fallback",
        PlanStatus::Feasible => "feasible",
        PlanStatus::Infeasible => "infeasible",
        PlanStatus::CombinatorialExhausted => "combinatorial_exhausted",
        PlanStatus::Incomplete => "incomplete",
    }
}

pub fn parse_status(s: &str) -> Option<PlanStatus> {
    STATUSES.into_iter().find(|k| status_name(*k) == s)
}

impl PlanFile {
    pub fn from_plan(plan: &Plan) -> Self {
        let st = &plan.stats;
        PlanFile {
            version: PLAN_VERSION,
            solver: solver_name(plan.solver).into(),
            status: status_name(plan.status).into(),
            assignment: plan.assignment(),
            phases: plan
                .phases
                .iter()
                .map(|p| PhaseFile { surface: p.surface, foot: p.foot.to_array(), com: p.com.map(Vec3::to_array) })
                .collect(),
            alphas: plan.alphas.clone(),
            stats: StatsFile {
                lp_solves: st.lp_solves,
                simplex_iterations: st.simplex_iterations,
                combinations_tried: st.combinations_tried,
                nodes: st.nodes,
                iteration_limit_hit: st.iteration_limit_hit,
                unresolved_phases: st.unresolved_phases,
            },
            timing: Some(TimingFile { solve_time: st.solve_time }),
        }
    }

    pub fn to_plan(&self) -> Result<Plan> {
        let solver =
            parse_solver(&self.solver).ok_or_else(|| Error::Format(format!("unknown solver {:?}", self.solver)))?;
        let status =
            parse_status(&self.status).ok_or_else(|| Error::Format(format!("unknown status {:?}", self.status)))?;
        let phases: Vec<PhasePlan> = self
            .phases
            .iter()
            .map(|p| PhasePlan { surface: p.surface, foot: Vec3::from_array(p.foot), com: p.com.map(Vec3::from_array) })
            .collect();
        let assignment: Vec<usize> = phases.iter().map(|p| p.surface).collect();
        if assignment != self.assignment {
            return Err(Error::Format("assignment disagrees with the phase surfaces".into()));
        }
        let s = &self.stats;
        Ok(Plan {
            solver,
            status,
            phases,
            alphas: self.alphas.clone(),
            stats: SolveStats {
                lp_solves: s.lp_solves,
                simplex_iterations: s.simplex_iterations,
                combinations_tried: s.combinations_tried,
                nodes: s.nodes,
                iteration_limit_hit: s.iteration_limit_hit,
                unresolved_phases: s.unresolved_phases,
                solve_time: self.timing.map_or(0.0, |t| t.solve_time),
            },
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let p: PlanFile = serde_json::from_str(text)?;
        if p.version != PLAN_VERSION {
            return Err(Error::Format(format!("unsupported plan version {} (expected {PLAN_VERSION})", p.version)));
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serialises");
        s.push('\n');
        s
    }

    /// The file text with the timing object removed.
    pub fn canonical(&self) -> String {
        PlanFile { timing: None, ..self.clone() }.to_json()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
