//! Sweeps over accuracy targets, path losses, policies and V.
//!
//! For every `(G_avg, path loss)` cell each policy is run once per V on the
//! same seed, and the V with the lowest average energy among the runs that
//! meet the delay and accuracy targets (within the configured slack) with
//! stable virtual queues is kept.
//! The fixed-split and fixed-SNR families then report their best member.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use dnnsplit_core::summary::{energy_saving_pct, select_min_energy};
use dnnsplit_core::{sim, ControllerState, PolicyKind, RunResult};

use crate::config::Experiment;
use crate::formats::write_trace;
use crate::policy::{kind_label, PolicySpec};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] dnnsplit_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cell ({0}, {1}) outside the sweep grid")]
    NoSuchCell(usize, usize),
}

/// Every V tried for one concrete policy.
#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub policy: PolicyKind,
    pub runs: Vec<RunResult>,
    /// Index into `runs` of the chosen V, `None` when no V met the targets.
    pub selected: Option<usize>,
}

impl VariantOutcome {
    pub fn best(&self) -> Option<&RunResult> {
        self.selected.map(|i| &self.runs[i])
    }
}

#[derive(Debug, Clone)]
pub struct PolicyOutcome {
    pub spec: PolicySpec,
    pub variants: Vec<VariantOutcome>,
    /// Lowest-energy variant among those with a feasible V.
    pub best_variant: Option<usize>,
}

impl PolicyOutcome {
    pub fn best(&self) -> Option<(&VariantOutcome, &RunResult)> {
        let v = &self.variants[self.best_variant?];
        Some((v, v.best()?))
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub g_index: usize,
    pub pl_index: usize,
    pub g_avg: f64,
    pub path_loss_db: f64,
    pub policies: Vec<PolicyOutcome>,
}

impl CellOutcome {
    pub fn policy(&self, spec: PolicySpec) -> Option<&PolicyOutcome> {
        self.policies.iter().find(|p| p.spec == spec)
    }

    /// Selected run of `spec`, if it had a feasible V.
    pub fn best_run(&self, spec: PolicySpec) -> Option<&RunResult> {
        self.policy(spec)?.best().map(|(_, r)| r)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub cells: Vec<CellOutcome>,
}

impl ExperimentOutcome {
    pub fn cell(&self, g_index: usize, pl_index: usize) -> Option<&CellOutcome> {
        self.cells.iter().find(|c| c.g_index == g_index && c.pl_index == pl_index)
    }
}

/// One simulation of `policy` in cell `(g_avg, path_loss_db)` with weight `v`.
pub fn run_once(
    exp: &Experiment,
    policy: PolicyKind,
    g_avg: f64,
    path_loss_db: f64,
    v: f64,
    record_trace: bool,
) -> Result<RunResult, ExperimentError> {
    let state = ControllerState::new(exp.mu, exp.lambda_y, v, exp.d_avg, g_avg)?;
    let run = sim::RunConfig { record_trace, ..exp.run };
    Ok(sim::run_simulation(policy, &exp.model, &exp.lut, state, &exp.environment(path_loss_db), &run)?)
}

/// Run `policy` for every V of the sweep and pick the cheapest feasible one.
pub fn sweep_v(
    exp: &Experiment,
    policy: PolicyKind,
    g_avg: f64,
    path_loss_db: f64,
    check_accuracy: bool,
) -> Result<VariantOutcome, ExperimentError> {
    let runs = exp
        .v_list
        .par_iter()
        .map(|&v| run_once(exp, policy, g_avg, path_loss_db, v, false))
        .collect::<Result<Vec<_>, _>>()?;
    let rule = if check_accuracy { exp.feasibility } else { exp.feasibility.without_accuracy() };
    let selected = select_min_energy(&runs, &rule);
    Ok(VariantOutcome { policy, runs, selected })
}

/// Run every cell of the sweep without writing anything.
pub fn run_cells(exp: &Experiment) -> Result<ExperimentOutcome, ExperimentError> {
    for spec in &exp.policies {
        for kind in spec.expand(&exp.model) {
            kind.validate(&exp.model, &exp.lut)?;
        }
    }
    let grid: Vec<(usize, usize)> =
        (0..exp.g_avg_list.len()).flat_map(|i| (0..exp.path_loss_db_list.len()).map(move |j| (i, j))).collect();
    // flatten to (cell, policy, variant) so the pool sees every run at once
    let jobs: Vec<(usize, usize, PolicyKind)> = grid
        .iter()
        .enumerate()
        .flat_map(|(c, _)| {
            exp.policies
                .iter()
                .enumerate()
                .flat_map(move |(p, spec)| spec.expand(&exp.model).into_iter().map(move |k| (c, p, k)))
        })
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(c, p, kind)| {
            let (i, j) = grid[c];
            let check = exp.policies[p].needs_accuracy();
            sweep_v(exp, kind, exp.g_avg_list[i], exp.path_loss_db_list[j], check)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut outcomes = outcomes.into_iter();
    let mut cells = Vec::with_capacity(grid.len());
    for &(i, j) in &grid {
        let mut policies = Vec::with_capacity(exp.policies.len());
        for &spec in &exp.policies {
            let n = spec.expand(&exp.model).len();
            let variants: Vec<VariantOutcome> = outcomes.by_ref().take(n).collect();
            let best_variant = variants
                .iter()
                .enumerate()
                .filter_map(|(idx, v)| v.best().map(|r| (idx, r.avg_energy)))
                .fold(None, |best: Option<(usize, f64)>, (idx, e)| match best {
                    Some((_, b)) if b <= e => best,
                    _ => Some((idx, e)),
                })
                .map(|(idx, _)| idx);
            policies.push(PolicyOutcome { spec, variants, best_variant });
        }
        cells.push(CellOutcome {
            g_index: i,
            pl_index: j,
            g_avg: exp.g_avg_list[i],
            path_loss_db: exp.path_loss_db_list[j],
            policies,
        });
    }
    Ok(ExperimentOutcome { cells })
}

/// Run the sweep and write all artifacts under `out_dir`.
pub fn run_experiment(exp: &Experiment, out_dir: &Path) -> Result<ExperimentOutcome, ExperimentError> {
    let outcome = run_cells(exp)?;
    write_outputs(exp, &outcome, out_dir)?;
    Ok(outcome)
}

fn write_file(path: PathBuf, text: &str) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| ExperimentError::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(&path, text).map_err(|source| ExperimentError::Io { path, source })
}

pub const CELL_HEADER: &str =
    "policy,param,v,avg_energy_j,avg_delay_s,avg_accuracy,avg_sp,z_over_n,y_over_n,active_slots,feasible,selected,family_best";
pub const SUMMARY_HEADER: &str =
    "g_avg,path_loss_db,policy,param,v,avg_energy_j,avg_delay_s,avg_accuracy,avg_sp,status,dynamic_saving_pct";

/// Raw per-run results of one cell.
pub fn cell_csv(exp: &Experiment, cell: &CellOutcome) -> String {
    let mut out = format!("{CELL_HEADER}\n");
    for p in &cell.policies {
        for (vi, variant) in p.variants.iter().enumerate() {
            let (name, param) = kind_label(&variant.policy);
            for (ri, r) in variant.runs.iter().enumerate() {
                let rule = if p.spec.needs_accuracy() { exp.feasibility } else { exp.feasibility.without_accuracy() };
                let feasible = rule.accepts(r);
                let selected = variant.selected == Some(ri);
                let _ = writeln!(
                    out,
                    "{name},{param},{},{},{},{},{},{},{},{},{},{},{}",
                    r.meta.v,
                    r.avg_energy,
                    r.avg_delay,
                    r.avg_accuracy,
                    r.avg_sp,
                    r.final_z_over_n,
                    r.final_y_over_n,
                    r.active_slots,
                    feasible as u8,
                    selected as u8,
                    (selected && p.best_variant == Some(vi)) as u8,
                );
            }
        }
    }
    out
}

/// Selected run of every policy in every cell, with the energy the dynamic
/// controller saves against it.
pub fn summary_csv(outcome: &ExperimentOutcome) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for cell in &outcome.cells {
        let dynamic = cell.best_run(PolicySpec::Dynamic);
        for p in &cell.policies {
            let _ = write!(out, "{},{},{},", cell.g_avg, cell.path_loss_db, p.spec);
            match p.best() {
                Some((variant, r)) => {
                    let (_, param) = kind_label(&variant.policy);
                    let saving =
                        dynamic.map(|d| energy_saving_pct(d.avg_energy, r.avg_energy).to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{param},{},{},{},{},{},OK,{saving}",
                        r.meta.v, r.avg_energy, r.avg_delay, r.avg_accuracy, r.avg_sp
                    );
                }
                None => {
                    let _ = writeln!(out, ",,,,,,INFEASIBLE,");
                }
            }
        }
    }
    out
}

/// Dynamic-vs-benchmark savings laid out as a (target, path loss) grid.
pub fn savings_csv(outcome: &ExperimentOutcome) -> String {
    let mut out = String::from("g_avg,path_loss_db,vs_flc_pct,vs_bfsp_pct,vs_bfsnr_pct\n");
    for cell in &outcome.cells {
        let dynamic = cell.best_run(PolicySpec::Dynamic);
        let _ = write!(out, "{},{}", cell.g_avg, cell.path_loss_db);
        for spec in [PolicySpec::Flc, PolicySpec::Bfsp, PolicySpec::Bfsnr] {
            let v = match (dynamic, cell.best_run(spec)) {
                (Some(d), Some(b)) => energy_saving_pct(d.avg_energy, b.avg_energy).to_string(),
                _ => String::new(),
            };
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Average splitting point of the dynamic controller against the accuracy
/// target, one column per path loss.
pub fn avg_sp_csv(exp: &Experiment, outcome: &ExperimentOutcome) -> String {
    let mut out = String::from("g_avg");
    for pl in &exp.path_loss_db_list {
        let _ = write!(out, ",avg_sp_pl_{pl}db");
    }
    out.push('\n');
    for (i, g) in exp.g_avg_list.iter().enumerate() {
        let _ = write!(out, "{g}");
        for j in 0..exp.path_loss_db_list.len() {
            let v = outcome
                .cell(i, j)
                .and_then(|c| c.best_run(PolicySpec::Dynamic))
                .map(|r| r.avg_sp.to_string())
                .unwrap_or_default();
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Effective accuracy of the accuracy-unaware controller next to the target
/// and what the dynamic controller achieved.
pub fn accuracy_unaware_csv(outcome: &ExperimentOutcome) -> String {
    let mut out = String::from("path_loss_db,g_avg,unaware_accuracy,dynamic_accuracy\n");
    for cell in &outcome.cells {
        let get = |spec| cell.best_run(spec).map(|r| r.avg_accuracy.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            cell.path_loss_db,
            cell.g_avg,
            get(PolicySpec::AccuracyUnaware),
            get(PolicySpec::Dynamic)
        );
    }
    out
}

pub fn write_outputs(exp: &Experiment, outcome: &ExperimentOutcome, dir: &Path) -> Result<(), ExperimentError> {
    for cell in &outcome.cells {
        write_file(
            dir.join("cells").join(format!("cell_{}_{}.csv", cell.g_index, cell.pl_index)),
            &cell_csv(exp, cell),
        )?;
    }
    write_file(dir.join("summary.csv"), &summary_csv(outcome))?;
    write_file(dir.join("savings.csv"), &savings_csv(outcome))?;
    write_file(dir.join("avg_sp.csv"), &avg_sp_csv(exp, outcome))?;
    write_file(dir.join("accuracy_unaware.csv"), &accuracy_unaware_csv(outcome))?;
    Ok(())
}

/// A single traced run of `policy` in cell `(g_index, pl_index)`. Without an
/// explicit `v`, the V sweep picks it first (falling back to the first V when
/// none is feasible).
pub fn trace_run(
    exp: &Experiment,
    policy: PolicyKind,
    g_index: usize,
    pl_index: usize,
    v: Option<f64>,
) -> Result<RunResult, ExperimentError> {
    let (g_avg, pl) = match (exp.g_avg_list.get(g_index), exp.path_loss_db_list.get(pl_index)) {
        (Some(&g), Some(&pl)) => (g, pl),
        _ => return Err(ExperimentError::NoSuchCell(g_index, pl_index)),
    };
    let v = match v {
        Some(v) => v,
        None => {
            let check = policy != PolicyKind::AccuracyUnaware;
            let sweep = sweep_v(exp, policy, g_avg, pl, check)?;
            sweep.best().map(|r| r.meta.v).unwrap_or(exp.v_list[0])
        }
    };
    run_once(exp, policy, g_avg, pl, v, true)
}

pub fn write_trace_file(result: &RunResult, path: &Path) -> Result<(), ExperimentError> {
    let mut buf = Vec::new();
    let records = result.trace.as_deref().unwrap_or(&[]);
    write_trace(&mut buf, records).map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })?;
    write_file(path.to_path_buf(), std::str::from_utf8(&buf).expect("ascii"))
}
