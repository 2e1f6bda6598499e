//! Slot-level simulation of the edge-inference system.
//!
//! Each slot draws a batch size (Poisson), a Rayleigh fading power gain
//! (unit-mean exponential, divided by the path loss) and a server availability
//! fraction (uniform), asks the policy for a decision, prices it and feeds the
//! realized delay and accuracy back into the virtual queues. The three draws
//! come from separate ChaCha streams of one seed, so changing e.g. the arrival
//! rate leaves the fading sequence untouched.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::accuracy::AccuracyLut;
use crate::controller::{policy_decide, ControllerState, PolicyKind};
use crate::cost::{SlotContext, SystemModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentParams {
    /// Linear attenuation (> 1 for a loss).
    pub path_loss: f64,
    /// Mean batch size per slot.
    pub arrival_rate: f64,
    /// Lower end of the server availability draw.
    pub alpha_floor: f64,
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        Self { path_loss: crate::units::db_to_linear(115.0), arrival_rate: 5.0, alpha_floor: 0.0 }
    }
}

impl EnvironmentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss.is_finite() && self.path_loss > 0.0) {
            return Err(Error::InvalidParameter { name: "path_loss", reason: "must be finite and > 0" });
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate >= 0.0) {
            return Err(Error::InvalidParameter { name: "arrival_rate", reason: "must be finite and >= 0" });
        }
        if !(0.0..1.0).contains(&self.alpha_floor) {
            return Err(Error::InvalidParameter { name: "alpha_floor", reason: "must lie in [0, 1)" });
        }
        Ok(())
    }
}

const FADING_STREAM: u64 = 1;
const ARRIVAL_STREAM: u64 = 2;
const AVAILABILITY_STREAM: u64 = 3;

/// Independent generators for the three sources of randomness.
#[derive(Debug, Clone)]
pub struct RngStreams {
    fading: ChaCha8Rng,
    arrivals: ChaCha8Rng,
    availability: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |id| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            fading: stream(FADING_STREAM),
            arrivals: stream(ARRIVAL_STREAM),
            availability: stream(AVAILABILITY_STREAM),
        }
    }
}

/// Draw the exogenous state of slot `t`.
pub fn gen_slot_context(env: &EnvironmentParams, rng: &mut RngStreams, t: u64) -> SlotContext {
    let fade: f64 = Exp1.sample(&mut rng.fading);
    let channel_gain = fade.max(f64::MIN_POSITIVE) / env.path_loss;

    let batch_size = if env.arrival_rate > 0.0 {
        // validated rate, so construction cannot fail
        let draw: f64 = Poisson::new(env.arrival_rate).map(|p| p.sample(&mut rng.arrivals)).unwrap_or(0.0);
        draw as u32
    } else {
        0
    };

    // (0, 1], shifted onto (alpha_floor, 1]
    let u = 1.0 - rng.availability.random::<f64>();
    let alpha_r = env.alpha_floor + (1.0 - env.alpha_floor) * u;

    SlotContext { t, batch_size, channel_gain, alpha_r }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub n_slots: u64,
    pub seed: u64,
    /// Leading fraction of slots excluded from the averages.
    pub transient_fraction: f64,
    pub record_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { n_slots: 10_000, seed: 1, transient_fraction: 0.1, record_trace: false }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(Error::InvalidParameter { name: "n_slots", reason: "must be >= 1" });
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::InvalidParameter { name: "transient_fraction", reason: "must lie in [0, 1)" });
        }
        Ok(())
    }

    /// Number of leading slots dropped from the averages.
    pub fn transient_slots(&self) -> u64 {
        (self.transient_fraction * self.n_slots as f64) as u64
    }
}

/// One row of the per-slot trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub t: u64,
    pub batch: u32,
    pub channel_gain: f64,
    pub alpha_r: f64,
    pub k: usize,
    /// Linear; zero when nothing was transmitted.
    pub gamma: f64,
    pub bandwidth: f64,
    pub f_local: f64,
    pub d_total: f64,
    pub e_total: f64,
    pub accuracy: f64,
    /// Queues seen by the controller when it took this decision.
    pub z: f64,
    pub y: f64,
}

/// Identifies the setup a run was produced under, so results from different
/// setups are never compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMeta {
    pub policy: PolicyKind,
    pub seed: u64,
    pub n_slots: u64,
    pub transient_fraction: f64,
    pub env: EnvironmentParams,
    pub v: f64,
    pub d_avg: f64,
    pub g_avg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub meta: RunMeta,
    /// J per slot
    pub avg_energy: f64,
    /// s per slot
    pub avg_delay: f64,
    pub avg_accuracy: f64,
    pub avg_sp: f64,
    /// Post-transient slots with at least one request; the averages run over these.
    pub active_slots: u64,
    pub final_z_over_n: f64,
    pub final_y_over_n: f64,
    pub trace: Option<Vec<SlotRecord>>,
}

impl RunResult {
    /// Whether the averages meet both targets within a relative `slack`.
    /// The accuracy target is skipped when `check_accuracy` is false.
    pub fn meets_constraints(&self, slack: f64, check_accuracy: bool) -> bool {
        self.meets_delay(slack) && (!check_accuracy || self.meets_accuracy(slack))
    }

    pub fn meets_delay(&self, slack: f64) -> bool {
        self.avg_delay <= self.meta.d_avg * (1.0 + slack)
    }

    pub fn meets_accuracy(&self, slack: f64) -> bool {
        self.avg_accuracy >= self.meta.g_avg * (1.0 - slack)
    }

    /// Empirical mean-rate stability: both final backlogs per slot below `threshold`.
    pub fn is_stable(&self, threshold: f64) -> bool {
        self.final_z_over_n < threshold && self.final_y_over_n < threshold
    }
}

/// Run `policy` for `run.n_slots` slots and average the post-transient,
/// non-empty slots. Empty slots leave the queues untouched.
pub fn run_simulation(
    policy: PolicyKind,
    model: &SystemModel,
    lut: &AccuracyLut,
    controller: ControllerState,
    env: &EnvironmentParams,
    run: &RunConfig,
) -> Result<RunResult> {
    model.validate()?;
    controller.validate()?;
    env.validate()?;
    run.validate()?;
    lut.check_compatible(model.last_sp(), &model.radio.snr_grid)?;
    policy.validate(model, lut)?;

    let mut state = policy.initial_state(controller);
    let mut rng = RngStreams::new(run.seed);
    let skip = run.transient_slots();
    let mut trace = if run.record_trace { Some(Vec::with_capacity(run.n_slots as usize)) } else { None };

    let (mut energy, mut delay, mut accuracy, mut sp) = (0.0, 0.0, 0.0, 0.0);
    let mut active = 0u64;

    for t in 0..run.n_slots {
        let ctx = gen_slot_context(env, &mut rng, t);
        let report = policy_decide(policy, &state, model, lut, &ctx)?;
        if let Some(trace) = trace.as_mut() {
            let d = report.decision;
            trace.push(SlotRecord {
                t,
                batch: ctx.batch_size,
                channel_gain: ctx.channel_gain,
                alpha_r: ctx.alpha_r,
                k: d.k,
                gamma: d.gamma,
                bandwidth: d.bandwidth,
                f_local: d.f_local,
                d_total: report.cost.d_total,
                e_total: report.cost.e_total,
                accuracy: report.accuracy,
                z: state.z,
                y: state.y,
            });
        }
        if ctx.batch_size == 0 {
            continue;
        }
        state = state.queue_update(report.cost.d_total, report.accuracy);
        if t >= skip {
            active += 1;
            energy += report.cost.e_total;
            delay += report.cost.d_total;
            accuracy += report.accuracy;
            sp += report.decision.k as f64;
        }
    }

    let mean = |sum: f64| if active > 0 { sum / active as f64 } else { 0.0 };
    let n = run.n_slots as f64;
    Ok(RunResult {
        meta: RunMeta {
            policy,
            seed: run.seed,
            n_slots: run.n_slots,
            transient_fraction: run.transient_fraction,
            env: *env,
            v: controller.v,
            d_avg: controller.d_avg,
            g_avg: controller.g_avg,
        },
        avg_energy: mean(energy),
        avg_delay: mean(delay),
        avg_accuracy: mean(accuracy),
        avg_sp: mean(sp),
        active_slots: active,
        final_z_over_n: state.z / n,
        final_y_over_n: state.y / n,
        trace,
    })
}
