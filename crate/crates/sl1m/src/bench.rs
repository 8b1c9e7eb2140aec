//! Timing grids of SL1M against the branch-and-bound baseline.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sl1m_core::mi::{solve_mi, MiOptions};
use sl1m_core::sl1m::{solve_sl1m, Sl1mOptions};
use sl1m_core::validate::validate;
use sl1m_core::{Plan, ProblemInstance};

use crate::error::{Error, Result};
use crate::generators::{gen_corridor, gen_toy};
use crate::plan_file::status_name;
use crate::scenario::ScenarioFile;
use crate::svg::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Toy,
    Corridor,
}

impl Family {
    /// Name of the second grid axis.
    pub fn axis_name(self) -> &'static str {
        match self {
            Family::Toy => "surfaces",
            Family::Corridor => "window",
        }
    }

    /// Scenario of one cell. For the toy family `surfaces` must be a power
    /// of two; for the corridor it is the candidate window.
    pub fn scenario(self, steps: usize, surfaces: usize) -> ScenarioFile {
        match self {
            Family::Toy => gen_toy(steps, surfaces.trailing_zeros()),
            Family::Corridor => gen_corridor(steps, surfaces),
        }
    }
}

/// Inclusive integer range written `A..B` (or a single `A`).
pub fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").unwrap_or((s, s));
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

/// Second-axis values of a grid: powers of two in range for the toy family,
/// every integer for the corridor.
pub fn surfaces_axis(family: Family, (a, b): (usize, usize)) -> Vec<usize> {
    match family {
        Family::Toy => (0..usize::BITS).map(|s| 1usize << s).skip_while(|&v| v < a).take_while(|&v| v <= b).collect(),
        Family::Corridor => (a..=b).collect(),
    }
}

/// Per-run wall-clock budget of the baseline, in seconds. With a goal-distance
/// objective it must prove optimality, which on wide corridor windows takes
/// far longer than any grid can afford; such runs report `incomplete`.
pub const DEFAULT_MI_TIME_LIMIT: f64 = 60.0;

#[derive(Clone, Debug)]
pub struct GridSpec {
    pub family: Family,
    pub steps: Vec<usize>,
    pub surfaces: Vec<usize>,
    pub repeats: usize,
    pub serial: bool,
    pub sl1m: Sl1mOptions,
    pub mi: MiOptions,
}

impl GridSpec {
    pub fn new(family: Family, steps: Vec<usize>, surfaces: Vec<usize>, repeats: usize) -> Self {
        GridSpec {
            family,
            steps,
            surfaces,
            repeats,
            serial: false,
            sl1m: Sl1mOptions::default(),
            mi: MiOptions { time_limit: Some(DEFAULT_MI_TIME_LIMIT), ..MiOptions::default() },
        }
    }
}

/// One CSV row. Times are seconds; `ratio` is SL1M median over MI median.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub family: Family,
    pub steps: usize,
    pub surfaces: usize,
    pub sl1m_status: String,
    pub mi_status: String,
    pub sl1m_median: f64,
    pub sl1m_mean: f64,
    pub mi_median: f64,
    pub mi_mean: f64,
    pub ratio: f64,
    /// Phases the relaxation resolved on its own, over all phases.
    pub resolved_phases: usize,
    pub phases: usize,
    pub sl1m_combinations: usize,
    pub mi_nodes: usize,
    /// Every feasible plan of the cell passed validation.
    pub validated: bool,
    pub error: String,
}

impl CellResult {
    pub fn sl1m_feasible(&self) -> bool {
        matches!(self.sl1m_status.as_str(), "sparse_direct" | "fixed_after_fallback")
    }

    pub fn mi_feasible(&self) -> bool {
        self.mi_status == "feasible"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub family: Family,
    pub cells: Vec<CellResult>,
}

/// Median and mean of a non-empty sample.
pub fn median_mean(xs: &[f64]) -> (f64, f64) {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
    (median, s.iter().sum::<f64>() / n as f64)
}

fn timed(repeats: usize, mut f: impl FnMut() -> sl1m_core::Result<Plan>) -> sl1m_core::Result<(Plan, Vec<f64>)> {
    let mut times = Vec::with_capacity(repeats);
    let mut first = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let plan = f()?;
        times.push(t.elapsed().as_secs_f64());
        first.get_or_insert(plan);
    }
    Ok((first.unwrap(), times))
}

fn plan_ok(inst: &ProblemInstance, plan: &Plan) -> bool {
    !plan.is_feasible() || validate(inst, plan).ok()
}

/// Runs one cell. Generation is outside the timed region; each timed run
/// covers assembly, relaxation, sparsity fixing and fallback.
pub fn run_cell(spec: &GridSpec, steps: usize, surfaces: usize) -> CellResult {
    let mut cell = CellResult {
        family: spec.family,
        steps,
        surfaces,
        sl1m_status: "error".into(),
        mi_status: "error".into(),
        sl1m_median: f64::NAN,
        sl1m_mean: f64::NAN,
        mi_median: f64::NAN,
        mi_mean: f64::NAN,
        ratio: f64::NAN,
        resolved_phases: 0,
        phases: steps,
        sl1m_combinations: 0,
        mi_nodes: 0,
        validated: false,
        error: String::new(),
    };
    let inst = match spec.family.scenario(steps, surfaces).to_instance() {
        Ok(i) => i,
        Err(e) => {
            cell.error = e.to_string();
            return cell;
        }
    };
    cell.phases = inst.phases.len();
    let mut errors = Vec::new();
    let mut valid = true;
    match timed(spec.repeats, || solve_sl1m(&inst, &spec.sl1m)) {
        Ok((plan, t)) => {
            cell.sl1m_status = status_name(plan.status).into();
            (cell.sl1m_median, cell.sl1m_mean) = median_mean(&t);
            cell.resolved_phases = cell.phases - plan.stats.unresolved_phases.min(cell.phases);
            cell.sl1m_combinations = plan.stats.combinations_tried;
            valid &= plan_ok(&inst, &plan);
        }
        Err(e) => errors.push(format!("sl1m: {e}")),
    }
    match timed(spec.repeats, || solve_mi(&inst, &spec.mi)) {
        Ok((plan, t)) => {
            cell.mi_status = status_name(plan.status).into();
            (cell.mi_median, cell.mi_mean) = median_mean(&t);
            cell.mi_nodes = plan.stats.nodes;
            valid &= plan_ok(&inst, &plan);
        }
        Err(e) => errors.push(format!("mi: {e}")),
    }
    cell.ratio = cell.sl1m_median / cell.mi_median;
    cell.validated = valid && errors.is_empty();
    cell.error = errors.join("; ");
    cell
}

/// Runs every cell of the grid, steps-major. Cells are spread over worker
/// threads unless `spec.serial` is set; the result order never depends on
/// scheduling.
pub fn run_grid(spec: &GridSpec) -> BenchReport {
    let cells: Vec<(usize, usize)> =
        spec.steps.iter().flat_map(|&s| spec.surfaces.iter().map(move |&c| (s, c))).collect();
    let workers = if spec.serial {
        1
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len().max(1))
    };
    let results: Vec<Mutex<Option<CellResult>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(steps, surfaces)) = cells.get(i) else { break };
                let r = run_cell(spec, steps, surfaces);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    BenchReport {
        family: spec.family,
        cells: results.into_iter().map(|m| m.into_inner().unwrap().expect("every cell ran")).collect(),
    }
}

impl BenchReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Vec<CellResult>> {
        let mut r = csv::Reader::from_path(path)?;
        Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
    }

    /// Heatmap of `log10(ratio)`: blue where SL1M is faster, red where it is
    /// slower. Cells where either solver found no plan are grey.
    pub fn heatmap_svg(&self) -> String {
        let mut steps: Vec<usize> = self.cells.iter().map(|c| c.steps).collect();
        let mut cols: Vec<usize> = self.cells.iter().map(|c| c.surfaces).collect();
        steps.sort_unstable();
        steps.dedup();
        cols.sort_unstable();
        cols.dedup();
        let (cw, ch, left, top) = (60.0, 18.0, 50.0, 30.0);
        let width = left + cw * cols.len() as f64 + 10.0;
        let height = top + ch * steps.len() as f64 + 10.0;
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="monospace" font-size="10">"#,
            num(width),
            num(height)
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let axis = self.cells.first().map_or("surfaces", |c| c.family.axis_name());
        let _ = writeln!(s, r#"<text x="2" y="12">steps \ {axis}, log10(sl1m/mi)</text>"#);
        for (j, c) in cols.iter().enumerate() {
            let _ = writeln!(s, r#"<text x="{}" y="{}">{c}</text>"#, num(left + cw * j as f64 + 4.0), num(top - 4.0));
        }
        for (i, st) in steps.iter().enumerate() {
            let y = top + ch * i as f64;
            let _ = writeln!(s, r#"<text x="4" y="{}">{st}</text>"#, num(y + 13.0));
            for (j, c) in cols.iter().enumerate() {
                let Some(cell) = self.cells.iter().find(|x| x.steps == *st && x.surfaces == *c) else { continue };
                let x = left + cw * j as f64;
                let solved = cell.sl1m_feasible() && cell.mi_feasible() && cell.ratio.is_finite() && cell.ratio > 0.0;
                let (fill, label) = if solved {
                    let l = cell.ratio.log10();
                    (heat_color(l), format!("{l:.2}"))
                } else {
                    ("#bbbbbb".to_string(), short_status(&cell.sl1m_status).to_string())
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="white"/><text x="{}" y="{}">{label}</text>"#,
                    num(x),
                    num(y),
                    num(cw),
                    num(ch),
                    num(x + 4.0),
                    num(y + 13.0)
                );
            }
        }
        let _ = writeln!(s, "</svg>");
        s
    }

    pub fn write_heatmap(&self, path: &Path) -> Result<()> {
        fs::write(path, self.heatmap_svg()).map_err(|e| Error::io(path, e))
    }
}

fn short_status(s: &str) -> &str {
    match s {
        "combinatorial_exhausted" => "exh",
        "infeasible" => "inf",
        "incomplete" => "lim",
        "error" => "err",
        _ => "mi?",
    }
}

/// Diverging colour for `l` in log10 units, saturating at two decades.
fn heat_color(l: f64) -> String {
    let t = (l / 2.0).clamp(-1.0, 1.0);
    let fade = |v: f64| (255.0 * (1.0 - v)).round() as u8;
    if t < 0.0 {
        let v = fade(-t);
        format!("#{v:02x}{v:02x}ff")
    } else {
        let v = fade(t);
        format!("#ff{v:02x}{v:02x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("2..38"), Ok((2, 38)));
        assert_eq!(parse_range("2..=5"), Ok((2, 5)));
        assert_eq!(parse_range("4"), Ok((4, 4)));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn toy_axis_keeps_powers_of_two() {
        assert_eq!(surfaces_axis(Family::Toy, (1, 8)), vec![1, 2, 4, 8]);
        assert_eq!(surfaces_axis(Family::Toy, (3, 7)), vec![4]);
        assert_eq!(surfaces_axis(Family::Corridor, (0, 2)), vec![0, 1, 2]);
    }

    #[test]
    fn single_repeat_median_is_mean() {
        assert_eq!(median_mean(&[0.25]), (0.25, 0.25));
        assert_eq!(median_mean(&[3.0, 1.0, 2.0, 10.0]), (2.5, 4.0));
    }

    #[test]
    fn small_toy_grid_is_feasible_and_ordered() {
        let mut spec = GridSpec::new(Family::Toy, vec![2, 3], vec![1, 2], 1);
        spec.serial = true;
        let r = run_grid(&spec);
        let keys: Vec<_> = r.cells.iter().map(|c| (c.steps, c.surfaces)).collect();
        assert_eq!(keys, vec![(2, 1), (2, 2), (3, 1), (3, 2)]);
        for c in &r.cells {
            assert!(c.sl1m_feasible() && c.mi_feasible() && c.validated, "{c:?}");
            assert_eq!(c.sl1m_median, c.sl1m_mean);
        }
    }

    #[test]
    fn csv_round_trips() {
        let spec = GridSpec::new(Family::Corridor, vec![4], vec![0, 1], 1);
        let r = run_grid(&spec);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        r.write_csv(&path).unwrap();
        assert_eq!(BenchReport::read_csv(&path).unwrap(), r.cells);
        assert!(r.heatmap_svg().matches("<rect").count() == 3);
    }
}
