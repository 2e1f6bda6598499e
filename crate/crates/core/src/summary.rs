//! Comparing runs: energy savings, constraint flags and V selection.

use alloc::vec::Vec;

use crate::controller::PolicyKind;
use crate::sim::RunResult;
use crate::{Error, Result};

/// `100 (1 - policy / baseline)`.
pub fn energy_saving_pct(policy_energy: f64, baseline_energy: f64) -> f64 {
    100.0 * (1.0 - policy_energy / baseline_energy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: PolicyKind,
    pub g_avg: f64,
    pub v: f64,
    pub avg_energy: f64,
    pub avg_sp: f64,
    pub avg_delay: f64,
    pub avg_accuracy: f64,
    /// Energy saved relative to the baseline, percent.
    pub saving_pct: f64,
    pub delay_violated: bool,
    pub accuracy_violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub baseline: PolicyKind,
    pub rows: Vec<ComparisonRow>,
}

/// Tabulate `results` against `baseline`. All runs must share seed, horizon
/// and environment; otherwise the comparison would mix in sampling noise.
pub fn summarize(results: &[RunResult], baseline: &RunResult, slack: f64) -> Result<ComparisonTable> {
    let b = &baseline.meta;
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let m = &r.meta;
        if m.seed != b.seed {
            return Err(Error::ConfigMismatch("seed"));
        }
        if m.n_slots != b.n_slots || m.transient_fraction != b.transient_fraction {
            return Err(Error::ConfigMismatch("horizon"));
        }
        if m.env != b.env {
            return Err(Error::ConfigMismatch("environment"));
        }
        if m.d_avg != b.d_avg {
            return Err(Error::ConfigMismatch("delay target"));
        }
        rows.push(ComparisonRow {
            policy: m.policy,
            g_avg: m.g_avg,
            v: m.v,
            avg_energy: r.avg_energy,
            avg_sp: r.avg_sp,
            avg_delay: r.avg_delay,
            avg_accuracy: r.avg_accuracy,
            saving_pct: energy_saving_pct(r.avg_energy, baseline.avg_energy),
            delay_violated: !r.meets_delay(slack),
            accuracy_violated: m.policy != PolicyKind::AccuracyUnaware && !r.meets_accuracy(slack),
        });
    }
    Ok(ComparisonTable { baseline: b.policy, rows })
}

/// When a finished run counts as meeting its long-term constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// Relative tolerance on the delay and accuracy averages.
    pub slack: f64,
    /// Upper bound on `Z(N)/N` and `Y(N)/N`.
    pub stability: f64,
    pub check_accuracy: bool,
}

impl Feasibility {
    pub const fn new(slack: f64, stability: f64) -> Self {
        Self { slack, stability, check_accuracy: true }
    }

    pub const fn without_accuracy(self) -> Self {
        Self { check_accuracy: false, ..self }
    }

    pub fn accepts(&self, r: &RunResult) -> bool {
        r.meets_constraints(self.slack, self.check_accuracy) && r.is_stable(self.stability)
    }
}

/// Index of the lowest-energy run accepted by `rule`. Ties keep the earlier run.
pub fn select_min_energy(runs: &[RunResult], rule: &Feasibility) -> Option<usize> {
    runs.iter()
        .enumerate()
        .filter(|(_, r)| rule.accepts(r))
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, e)) if e <= r.avg_energy => best,
            _ => Some((i, r.avg_energy)),
        })
        .map(|(i, _)| i)
}
