//! Drift-plus-penalty control of the split point and radio/compute resources.
//!
//! Two virtual queues track the long-term constraints:
//!
//! ```text
//! Z(t+1) = max(0, Z(t) + mu       (D_tot(t) - D_avg))
//! Y(t+1) = max(0, Y(t) + lambda_y (G_avg - G(t)))
//! ```
//!
//! and each slot minimizes `mu Z D_tot - lambda_y Y G(k, gamma) + V E_tot`
//! subject to the per-slot power, bandwidth and clock limits. For a fixed
//! `(k, gamma)` the bandwidth and clock have closed forms, so the remaining
//! search is a plain enumeration of the splitting points and the SNR grid.

use crate::accuracy::AccuracyLut;
use crate::cost::{CostBreakdown, ResourceDecision, SlotContext, SystemModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Delay queue.
    pub z: f64,
    /// Accuracy queue.
    pub y: f64,
    pub mu: f64,
    pub lambda_y: f64,
    /// Energy weight in the per-slot objective.
    pub v: f64,
    /// Target average delay, s.
    pub d_avg: f64,
    /// Target average accuracy.
    pub g_avg: f64,
}

impl ControllerState {
    /// Fresh controller with empty queues.
    pub fn new(mu: f64, lambda_y: f64, v: f64, d_avg: f64, g_avg: f64) -> Result<Self> {
        let s = Self { z: 0.0, y: 0.0, mu, lambda_y, v, d_avg, g_avg };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad("mu", "must be finite and > 0");
        }
        if !(self.lambda_y.is_finite() && self.lambda_y >= 0.0) {
            return bad("lambda_y", "must be finite and >= 0");
        }
        if !(self.v.is_finite() && self.v > 0.0) {
            return bad("V", "must be finite and > 0");
        }
        if !(self.d_avg.is_finite() && self.d_avg > 0.0) {
            return bad("d_avg", "must be finite and > 0");
        }
        if !(0.0..=1.0).contains(&self.g_avg) {
            return bad("g_avg", "must lie in [0, 1]");
        }
        if !(self.z >= 0.0 && self.y >= 0.0) {
            return bad("queues", "must be >= 0");
        }
        Ok(())
    }

    /// One step of the queue recursions with the realized delay and accuracy.
    #[must_use]
    pub fn queue_update(&self, d_total: f64, accuracy: f64) -> Self {
        Self {
            z: f64::max(0.0, self.z + self.mu * (d_total - self.d_avg)),
            y: f64::max(0.0, self.y + self.lambda_y * (self.g_avg - accuracy)),
            ..*self
        }
    }

    /// `mu Z D_tot - lambda_y Y G + V E_tot`.
    #[inline]
    pub fn dpp_objective(&self, cost: &CostBreakdown, accuracy: f64) -> f64 {
        self.mu * self.z * cost.d_total - self.lambda_y * self.y * accuracy + self.v * cost.e_total
    }
}

/// Largest bandwidth the power budget allows at target SNR `gamma`, capped at
/// `W_max`; zero for full local computation.
pub fn optimal_bandwidth(model: &SystemModel, gamma: f64, k: usize, channel_gain: f64) -> f64 {
    if k >= model.last_sp() {
        return 0.0;
    }
    let power_limited = model.device.p_tx_max * channel_gain / (gamma * model.radio.n0_eff());
    power_limited.min(model.radio.w_max)
}

/// Stationary point of `mu Z b C / (eta f) + V b C kappa f^2 / eta`, clamped to
/// the device clock range; zero under full offloading.
pub fn optimal_frequency(state: &ControllerState, dev: &crate::DeviceParams, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let f = libm::cbrt(state.mu * state.z / (2.0 * dev.kappa * state.v));
    f.clamp(dev.f_l_min, dev.f_l_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDecisionReport {
    pub decision: ResourceDecision,
    pub cost: CostBreakdown,
    pub accuracy: f64,
    pub objective: f64,
}

impl SlotDecisionReport {
    pub const IDLE: SlotDecisionReport = SlotDecisionReport {
        decision: ResourceDecision::IDLE,
        cost: CostBreakdown {
            d_local: 0.0,
            d_tx: 0.0,
            d_remote: 0.0,
            d_total: 0.0,
            e_local: 0.0,
            e_tx: 0.0,
            e_total: 0.0,
            p_tx: 0.0,
        },
        accuracy: 0.0,
        objective: 0.0,
    };

    /// True for the placeholder decision of an empty slot.
    pub fn is_idle(&self) -> bool {
        *self == Self::IDLE
    }
}

/// Control policies: the adaptive controller and the benchmarks it is compared with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Joint adaptation of split point, SNR, bandwidth and clock.
    Dynamic,
    /// Full local computation at the queue-driven clock.
    FullLocal,
    /// Split point pinned, SNR adapted.
    FixedSp(usize),
    /// SNR pinned (linear), split point adapted.
    FixedSnr(f64),
    /// Dynamic control with the accuracy queue switched off.
    AccuracyUnaware,
}

impl PolicyKind {
    /// State the policy starts from. The accuracy-unaware controller keeps `Y`
    /// at zero by running with a zero step size.
    pub fn initial_state(&self, state: ControllerState) -> ControllerState {
        match self {
            PolicyKind::AccuracyUnaware => ControllerState { y: 0.0, lambda_y: 0.0, ..state },
            _ => state,
        }
    }

    pub fn validate(&self, model: &SystemModel, lut: &AccuracyLut) -> Result<()> {
        match *self {
            PolicyKind::FixedSp(k) if k > model.last_sp() => {
                Err(Error::InvalidPolicy(alloc::format!("fixed splitting point {k} outside 0..={}", model.last_sp())))
            }
            PolicyKind::FixedSnr(g) if lut.grid_index(g).is_none() => Err(Error::InvalidPolicy(alloc::format!(
                "fixed SNR {:.3} dB is not on the grid",
                crate::units::linear_to_db(g)
            ))),
            _ => Ok(()),
        }
    }
}

/// Which part of the `(k, gamma)` grid a search may visit.
#[derive(Debug, Clone, Copy)]
struct Restriction {
    k: Option<usize>,
    gamma_index: Option<usize>,
}

/// Drift-plus-penalty decision for one slot.
///
/// Enumerates every splitting point and, when something is transmitted, every
/// grid SNR; the bandwidth and clock take their closed forms. Ties on the
/// objective go to the lower energy, then the lower `k`, then the lower SNR.
pub fn decide(
    state: &ControllerState,
    model: &SystemModel,
    lut: &AccuracyLut,
    ctx: &SlotContext,
) -> Result<SlotDecisionReport> {
    search(state, model, lut, ctx, Restriction { k: None, gamma_index: None })
}

/// Decision under one of the benchmark policies. Pass the state as evolved by
/// [`PolicyKind::initial_state`] and [`ControllerState::queue_update`].
pub fn policy_decide(
    policy: PolicyKind,
    state: &ControllerState,
    model: &SystemModel,
    lut: &AccuracyLut,
    ctx: &SlotContext,
) -> Result<SlotDecisionReport> {
    policy.validate(model, lut)?;
    match policy {
        PolicyKind::Dynamic => decide(state, model, lut, ctx),
        PolicyKind::FullLocal => {
            search(state, model, lut, ctx, Restriction { k: Some(model.last_sp()), gamma_index: None })
        }
        PolicyKind::FixedSp(k) => search(state, model, lut, ctx, Restriction { k: Some(k), gamma_index: None }),
        PolicyKind::FixedSnr(g) => {
            let i = lut.grid_index(g).ok_or(Error::SnrOffGrid(g))?;
            search(state, model, lut, ctx, Restriction { k: None, gamma_index: Some(i) })
        }
        PolicyKind::AccuracyUnaware => {
            let s = policy.initial_state(*state);
            decide(&s, model, lut, ctx)
        }
    }
}

fn search(
    state: &ControllerState,
    model: &SystemModel,
    lut: &AccuracyLut,
    ctx: &SlotContext,
    only: Restriction,
) -> Result<SlotDecisionReport> {
    ctx.validate()?;
    if ctx.batch_size == 0 {
        return Ok(SlotDecisionReport::IDLE);
    }
    let last = model.last_sp();
    let grid = model.radio.snr_grid.as_slice();
    let (k_lo, k_hi) = match only.k {
        Some(k) => (k, k),
        None => (0, last),
    };
    let (i_lo, i_hi) = match only.gamma_index {
        Some(i) => (i, i + 1),
        None => (0, grid.len()),
    };
    let f_star = optimal_frequency(state, &model.device, 1);

    let mut best: Option<SlotDecisionReport> = None;
    let mut consider = |decision: ResourceDecision, accuracy: f64| -> Result<()> {
        let cost = model.slot_cost(&decision, ctx)?;
        let objective = state.dpp_objective(&cost, accuracy);
        let better = match &best {
            None => true,
            Some(b) => objective < b.objective || (objective == b.objective && cost.e_total < b.cost.e_total),
        };
        if better {
            best = Some(SlotDecisionReport { decision, cost, accuracy, objective });
        }
        Ok(())
    };

    for k in k_lo..=k_hi {
        let f_local = if k == 0 { 0.0 } else { f_star };
        if k == last {
            let d = ResourceDecision { k, gamma: 0.0, bandwidth: 0.0, f_local };
            consider(d, lut.noiseless())?;
            continue;
        }
        for (i, &gamma) in grid.iter().enumerate().take(i_hi).skip(i_lo) {
            let bandwidth = optimal_bandwidth(model, gamma, k, ctx.channel_gain);
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                continue;
            }
            let d = ResourceDecision { k, gamma, bandwidth, f_local };
            consider(d, lut.at(k, i))?;
        }
    }
    best.ok_or(Error::InvalidPolicy(alloc::string::String::from("no feasible (k, gamma) pair")))
}
