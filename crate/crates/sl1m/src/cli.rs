//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or validation failure, 2 infeasible,
//! 3 enumeration cap or search limit reached, 64 usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use sl1m_core::lp::SolveOptions;
use sl1m_core::mi::{solve_mi, MiOptions};
use sl1m_core::oracle::{enumerate_feasible, solve_oracle};
use sl1m_core::problem::build_sl1m;
use sl1m_core::sl1m::{solve_sl1m, Sl1mOptions};
use sl1m_core::validate::validate;
use sl1m_core::{Plan, PlanStatus, ProblemInstance};

use crate::bench::{parse_range, surfaces_axis, Family, GridSpec};
use crate::dump::{write_lp_dump, write_oracle_csv};
use crate::error::Error;
use crate::plan_file::{status_name, PlanFile};
use crate::scenario::ScenarioFile;
use crate::svg::export_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMITS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "sl1m", version, about = "Contact surface selection for legged locomotion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Sl1m,
    Mi,
    Oracle,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan a contact sequence for a scenario file.
    Plan {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "sl1m")]
        solver: SolverArg,
        /// Slack below which a surface counts as selected.
        #[arg(long)]
        tol_zero: Option<f64>,
        /// Assignments the fallback may try (SL1M) or enumerate (oracle).
        #[arg(long)]
        max_combinations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the relaxation program in plain-text dump format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Write the oracle's feasibility table (oracle solver only).
        #[arg(long)]
        oracle_csv: Option<PathBuf>,
    },
    /// Time SL1M against branch and bound over a grid of generated scenarios.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        /// Step counts, `A..B` inclusive.
        #[arg(long, value_parser = parse_range)]
        steps: (usize, usize),
        /// Surface counts (toy, powers of two in range) or candidate windows
        /// (corridor), `A..B` inclusive.
        #[arg(long, value_parser = parse_range)]
        surfaces: (usize, usize),
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Run cells one at a time.
        #[arg(long)]
        serial: bool,
        /// Wall-clock budget of each branch-and-bound run, in seconds.
        #[arg(long, default_value_t = crate::bench::DEFAULT_MI_TIME_LIMIT)]
        mi_time_limit: f64,
    },
    /// Check a plan file against its scenario.
    Validate { scenario: PathBuf, plan: PathBuf },
    /// Write a generated scenario.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        steps: usize,
        /// Surface count (toy, a power of two) or candidate window (corridor).
        #[arg(long, default_value_t = 1)]
        surfaces: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

fn status_code(s: PlanStatus) -> i32 {
    match s {
        PlanStatus::SparseDirect | PlanStatus::FixedAfterFallback | PlanStatus::Feasible => EXIT_OK,
        PlanStatus::Infeasible => EXIT_INFEASIBLE,
        PlanStatus::CombinatorialExhausted | PlanStatus::Incomplete => EXIT_LIMITS,
    }
}

fn execute(cmd: Command) -> std::result::Result<i32, Failure> {
    match cmd {
        Command::Plan { scenario, solver, tol_zero, max_combinations, out, svg, dump_lp, oracle_csv } => {
            let file = ScenarioFile::load(&scenario)?;
            let inst = file.to_instance()?;
            if let Some(t) = tol_zero {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Failure::Usage(format!("--tol-zero must be a non-negative number, got {t}")));
                }
            }
            if let Some(path) = &dump_lp {
                write_lp_dump(&build_sl1m(&inst)?.lp, path)?;
            }
            let d = file.solver;
            let plan = match solver {
                SolverArg::Sl1m => solve_sl1m(
                    &inst,
                    &Sl1mOptions {
                        tol_zero: tol_zero.unwrap_or(d.tol_zero),
                        max_combinations: max_combinations.unwrap_or(d.max_combinations),
                        stop_at_first_feasible: d.stop_at_first_feasible,
                        lp: SolveOptions::default(),
                    },
                )?,
                SolverArg::Mi => solve_mi(
                    &inst,
                    &MiOptions {
                        big_m: file.build.big_m,
                        node_limit: d.node_limit,
                        time_limit: d.time_limit,
                        lp: SolveOptions::default(),
                    },
                )?,
                SolverArg::Oracle => {
                    let cap = max_combinations.unwrap_or(d.oracle_cap);
                    if let Some(path) = &oracle_csv {
                        let e = enumerate_feasible(&inst, cap)?;
                        write_oracle_csv(&inst, &e.assignments, e.tested, path)?;
                    }
                    solve_oracle(&inst, cap)?
                }
            };
            if oracle_csv.is_some() && !matches!(solver, SolverArg::Oracle) {
                eprintln!("note: --oracle-csv is only written by the oracle solver");
            }
            report_plan(&inst, &plan, out.as_deref(), svg.as_deref())
        }
        Command::Bench { family, steps, surfaces, repeats, csv, heatmap, serial, mi_time_limit } => {
            let axis = surfaces_axis(family, surfaces);
            if axis.is_empty() {
                return Err(Failure::Usage(format!(
                    "no {} values in {}..{}",
                    family.axis_name(),
                    surfaces.0,
                    surfaces.1
                )));
            }
            if repeats == 0 {
                return Err(Failure::Usage("--repeats must be at least 1".into()));
            }
            let mut spec = GridSpec::new(family, (steps.0..=steps.1).collect(), axis, repeats);
            spec.serial = serial;
            if !(mi_time_limit > 0.0) {
                return Err(Failure::Usage(format!("--mi-time-limit must be positive, got {mi_time_limit}")));
            }
            spec.mi.time_limit = Some(mi_time_limit);
            let report = crate::bench::run_grid(&spec);
            for c in &report.cells {
                println!(
                    "steps={:<3} {}={:<3} sl1m={:<24} mi={:<12} ratio={:.3e}{}",
                    c.steps,
                    family.axis_name(),
                    c.surfaces,
                    c.sl1m_status,
                    c.mi_status,
                    c.ratio,
                    if c.error.is_empty() { String::new() } else { format!(" error: {}", c.error) }
                );
            }
            report.write_csv(&csv)?;
            if let Some(h) = heatmap {
                report.write_heatmap(&h)?;
            }
            Ok(EXIT_OK)
        }
        Command::Validate { scenario, plan } => {
            let inst = ScenarioFile::load(&scenario)?.to_instance()?;
            let plan = PlanFile::load(&plan)?.to_plan()?;
            if !plan.is_feasible() {
                println!("plan has status {}; nothing to validate", status_name(plan.status));
                return Ok(status_code(plan.status));
            }
            if plan.phases.len() != inst.phases.len() {
                return Err(Failure::Runtime(Error::Format(format!(
                    "plan has {} phases, scenario has {}",
                    plan.phases.len(),
                    inst.phases.len()
                ))));
            }
            let report = validate(&inst, &plan);
            for v in &report.violations {
                println!(
                    "violation: {:?} phase {} contact {} surface {:?} residual {:.3e}{}",
                    v.tag.kind,
                    v.tag.phase,
                    v.tag.contact,
                    v.tag.surface,
                    v.residual,
                    v.sample.map_or(String::new(), |t| format!(" at t={t}"))
                );
            }
            if report.ok() {
                println!("ok");
                Ok(EXIT_OK)
            } else {
                println!("{} violations, worst residual {:.3e}", report.violations.len(), report.worst());
                Ok(EXIT_FAILURE)
            }
        }
        Command::Gen { family, steps, surfaces, out } => {
            if steps == 0 {
                return Err(Failure::Usage("--steps must be at least 1".into()));
            }
            if family == Family::Toy && !surfaces.is_power_of_two() {
                return Err(Failure::Usage(format!("toy surface count must be a power of two, got {surfaces}")));
            }
            family.scenario(steps, surfaces).save(&out)?;
            Ok(EXIT_OK)
        }
    }
}

fn report_plan(
    inst: &ProblemInstance,
    plan: &Plan,
    out: Option<&std::path::Path>,
    svg: Option<&std::path::Path>,
) -> std::result::Result<i32, Failure> {
    println!(
        "status: {}  lp solves: {}  combinations: {}  nodes: {}  time: {:.3} ms",
        status_name(plan.status),
        plan.stats.lp_solves,
        plan.stats.combinations_tried,
        plan.stats.nodes,
        plan.stats.solve_time * 1e3
    );
    if plan.is_feasible() {
        let ids: Vec<String> = plan.assignment().iter().map(|s| s.to_string()).collect();
        println!("assignment: {}", ids.join(" "));
    }
    if let Some(path) = out {
        PlanFile::from_plan(plan).save(path)?;
    }
    if let Some(path) = svg {
        export_svg(inst, plan, path)?;
    }
    if plan.is_feasible() {
        let report = validate(inst, plan);
        if !report.ok() {
            eprintln!("plan failed validation: worst residual {:.3e}", report.worst());
            return Ok(EXIT_FAILURE);
        }
    }
    Ok(status_code(plan.status))
}
