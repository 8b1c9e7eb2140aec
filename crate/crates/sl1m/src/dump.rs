//! Debug dumps: the oracle's feasibility table and assembled programs.

use std::fs;
use std::path::Path;

use sl1m_core::lp::{dump_text, LpProblem};
use sl1m_core::oracle::Assignments;
use sl1m_core::ProblemInstance;

use crate::error::{Error, Result};

/// Writes one row per tested assignment: its index, the surface of each
/// phase joined by `-`, and whether the fixed program is feasible.
/// `feasible` must be the oracle's output for `inst` with the given `tested`
/// count.
pub fn write_oracle_csv(inst: &ProblemInstance, feasible: &[Vec<usize>], tested: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "assignment", "feasible"])?;
    for (i, pick) in Assignments::new(inst).take(tested).enumerate() {
        let ids: Vec<String> = pick.iter().map(|s| s.to_string()).collect();
        let ok = feasible.contains(&pick);
        w.write_record([i.to_string(), ids.join("-"), ok.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_lp_dump(lp: &LpProblem, path: &Path) -> Result<()> {
    fs::write(path, dump_text(lp)).map_err(|e| Error::io(path, e))
}
