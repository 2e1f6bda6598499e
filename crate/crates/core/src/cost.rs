//! Per-slot delay and energy of a split inference request.
//!
//! All quantities are SI: seconds, joules, watts, hertz. For a decision at
//! splitting point `k` and a batch of `b` patterns:
//!
//! * local compute: `b * C_k / (eta_l f_l)` seconds and `b * C_k * kappa f_l^2 / eta_l` joules,
//!   where `C_k` is the cumulative FLOPs up to `k` (zero when `k = 0`);
//! * uplink: `(1 + beta) L_k b / (2 W)` seconds at power `gamma N0 W / |h|^2`
//!   (zero when `k = J`);
//! * server: `b (C_J - C_k) / (eta_r alpha_r f_r_max)` seconds (zero when `k = J`).

use crate::params::{DeviceParams, RadioParams, ServerParams};
use crate::profile::SplitProfile;
use crate::{Error, Result};

/// Relative slack when comparing a computed transmit power against the budget;
/// the closed-form bandwidth sits exactly on the budget up to rounding.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Exogenous randomness of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotContext {
    pub t: u64,
    /// Number of patterns issued this slot.
    pub batch_size: u32,
    /// `|h|^2`: path loss times fading power gain, linear.
    pub channel_gain: f64,
    /// Fraction of the server clock available, in `(0, 1]`.
    pub alpha_r: f64,
}

impl SlotContext {
    pub fn validate(&self) -> Result<()> {
        if !(self.channel_gain.is_finite() && self.channel_gain > 0.0) {
            return Err(Error::InvalidParameter { name: "channel_gain", reason: "must be finite and > 0" });
        }
        if !(self.alpha_r > 0.0 && self.alpha_r <= 1.0) {
            return Err(Error::InvalidAvailability(self.alpha_r));
        }
        Ok(())
    }
}

/// The per-slot control tuple: splitting point, target SNR, bandwidth and
/// device clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceDecision {
    pub k: usize,
    /// Target SNR, linear. Zero when nothing is transmitted.
    pub gamma: f64,
    /// Hz
    pub bandwidth: f64,
    /// Hz
    pub f_local: f64,
}

impl ResourceDecision {
    /// The decision taken on a slot with no requests.
    pub const IDLE: ResourceDecision = ResourceDecision { k: 0, gamma: 0.0, bandwidth: 0.0, f_local: 0.0 };

    pub fn transmits(&self, last_sp: usize) -> bool {
        self.k < last_sp
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostBreakdown {
    pub d_local: f64,
    pub d_tx: f64,
    pub d_remote: f64,
    pub d_total: f64,
    pub e_local: f64,
    pub e_tx: f64,
    pub e_total: f64,
    pub p_tx: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransmitCost {
    pub delay: f64,
    pub energy: f64,
    pub power: f64,
}

/// FLOPs of layers `0..=k`.
pub fn cumulative_flops(profile: &SplitProfile, k: usize) -> Result<f64> {
    profile.cumulative_flops(k)
}

/// Local compute `(delay, energy)` for running layers `0..=k` on `batch` patterns.
pub fn local_cost(
    profile: &SplitProfile,
    dev: &DeviceParams,
    k: usize,
    f_local: f64,
    batch: u32,
) -> Result<(f64, f64)> {
    let flops = profile.cumulative_flops(k)?;
    if k == 0 {
        if f_local != 0.0 {
            return Err(Error::FrequencyOutOfBounds { k, f_local });
        }
        return Ok((0.0, 0.0));
    }
    if !(f_local >= dev.f_l_min && f_local <= dev.f_l_max) {
        return Err(Error::FrequencyOutOfBounds { k, f_local });
    }
    let work = batch as f64 * flops;
    let delay = work / (dev.eta_l * f_local);
    let energy = work * dev.kappa * f_local * f_local / dev.eta_l;
    Ok((delay, energy))
}

/// Transmit power needed to reach `gamma` over `bandwidth` on a channel with power gain `channel_gain`.
#[inline]
pub fn transmit_power(radio: &RadioParams, gamma: f64, bandwidth: f64, channel_gain: f64) -> f64 {
    gamma * radio.n0_eff() * bandwidth / channel_gain
}

/// Uplink delay, energy and power for shipping the features at `k`.
#[allow(clippy::too_many_arguments)]
pub fn transmit_cost(
    profile: &SplitProfile,
    radio: &RadioParams,
    dev: &DeviceParams,
    k: usize,
    gamma: f64,
    bandwidth: f64,
    channel_gain: f64,
    batch: u32,
) -> Result<TransmitCost> {
    let features = profile.features(k)?;
    if k == profile.last_sp() {
        return Ok(TransmitCost::default());
    }
    if !(bandwidth > 0.0 && bandwidth <= radio.w_max) {
        return Err(Error::BandwidthOutOfBounds { k, bandwidth });
    }
    let power = transmit_power(radio, gamma, bandwidth, channel_gain);
    if power > dev.p_tx_max * (1.0 + POWER_TOLERANCE) {
        return Err(Error::PowerExceeded { p_tx: power, p_tx_max: dev.p_tx_max });
    }
    let delay = (1.0 + radio.beta) * features as f64 * batch as f64 / (2.0 * bandwidth);
    Ok(TransmitCost { delay, energy: power * delay, power })
}

/// Server-side delay for finishing layers `k+1..=J`.
pub fn remote_delay(profile: &SplitProfile, srv: &ServerParams, k: usize, alpha_r: f64, batch: u32) -> Result<f64> {
    if !(alpha_r > 0.0 && alpha_r <= 1.0) {
        return Err(Error::InvalidAvailability(alpha_r));
    }
    let done = profile.cumulative_flops(k)?;
    if k == profile.last_sp() {
        return Ok(0.0);
    }
    let remaining = profile.total_flops() - done;
    Ok(remaining * batch as f64 / (srv.eta_r * alpha_r * srv.f_r_max))
}

/// Everything needed to price a decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub profile: SplitProfile,
    pub device: DeviceParams,
    pub server: ServerParams,
    pub radio: RadioParams,
}

impl SystemModel {
    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.server.validate()?;
        self.radio.validate()
    }

    #[inline]
    pub fn last_sp(&self) -> usize {
        self.profile.last_sp()
    }

    /// Aggregate delay and energy of `decision` in `ctx`. Empty batches cost
    /// nothing whatever the decision.
    pub fn slot_cost(&self, decision: &ResourceDecision, ctx: &SlotContext) -> Result<CostBreakdown> {
        if ctx.batch_size == 0 {
            return Ok(CostBreakdown::default());
        }
        let k = decision.k;
        let last = self.last_sp();
        if k > last {
            return Err(Error::SplitOutOfRange { k, last });
        }
        if k == last && decision.bandwidth != 0.0 {
            return Err(Error::BandwidthOutOfBounds { k, bandwidth: decision.bandwidth });
        }
        let (d_local, e_local) = local_cost(&self.profile, &self.device, k, decision.f_local, ctx.batch_size)?;
        let tx = transmit_cost(
            &self.profile,
            &self.radio,
            &self.device,
            k,
            decision.gamma,
            decision.bandwidth,
            ctx.channel_gain,
            ctx.batch_size,
        )?;
        let d_remote = remote_delay(&self.profile, &self.server, k, ctx.alpha_r, ctx.batch_size)?;
        Ok(CostBreakdown {
            d_local,
            d_tx: tx.delay,
            d_remote,
            d_total: d_local + tx.delay + d_remote,
            e_local,
            e_tx: tx.energy,
            e_total: e_local + tx.energy,
            p_tx: tx.power,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::profile::Stage;
    use alloc::vec;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    pub(crate) fn toy_model() -> SystemModel {
        SystemModel {
            profile: SplitProfile::new(vec![
                Stage { features: 150_528, flops: 0.0 },
                Stage { features: 200_000, flops: 7e7 },
                Stage { features: 25_088, flops: 1e8 },
                Stage { features: 6, flops: 1e8 },
            ])
            .unwrap(),
            device: DeviceParams::default(),
            server: ServerParams::default(),
            radio: RadioParams::default(),
        }
    }

    #[test]
    fn cumulative_flops_examples() {
        let p = SplitProfile::new(vec![
            Stage { features: 3, flops: 1e6 },
            Stage { features: 2, flops: 2e6 },
            Stage { features: 1, flops: 4e6 },
        ])
        .unwrap();
        assert_eq!(cumulative_flops(&p, 0).unwrap(), 1e6);
        assert_eq!(cumulative_flops(&p, 1).unwrap(), 3e6);
        assert_eq!(cumulative_flops(&p, 2).unwrap(), 7e6);
        assert!(cumulative_flops(&p, 3).is_err());
    }

    #[test]
    fn local_cost_examples() {
        let m = toy_model();
        assert_eq!(local_cost(&m.profile, &m.device, 0, 0.0, 5).unwrap(), (0.0, 0.0));
        // C_1 = 7e7 FLOPs, 5 patterns at 1.4 GHz.
        let (d, e) = local_cost(&m.profile, &m.device, 1, 1.4e9, 5).unwrap();
        assert!(rel(d, 5.0e-3) < 1e-12);
        assert!(rel(e, 1.505e-2) < 1e-3, "{e}");

        let (d1, e1) = local_cost(&m.profile, &m.device, 2, 0.5e9, 5).unwrap();
        let (d2, e2) = local_cost(&m.profile, &m.device, 2, 1.0e9, 5).unwrap();
        assert!(rel(d2, d1 / 2.0) < 1e-12);
        assert!(rel(e2, 4.0 * e1) < 1e-12);
    }

    #[test]
    fn local_cost_rejects_inconsistent_clock() {
        let m = toy_model();
        assert!(matches!(local_cost(&m.profile, &m.device, 1, 0.0, 5), Err(Error::FrequencyOutOfBounds { .. })));
        assert!(local_cost(&m.profile, &m.device, 1, 2e9, 5).is_err());
        assert!(local_cost(&m.profile, &m.device, 0, 1e9, 5).is_err());
    }

    #[test]
    fn transmit_cost_examples() {
        let m = toy_model();
        let last = m.last_sp();
        let zero = transmit_cost(&m.profile, &m.radio, &m.device, last, 10.0, 0.0, 1e-12, 5).unwrap();
        assert_eq!(zero, TransmitCost::default());

        let profile =
            SplitProfile::new(vec![Stage { features: 200_000, flops: 0.0 }, Stage { features: 1, flops: 1.0 }])
                .unwrap();
        // low SNR so the power budget is irrelevant
        let tx = transmit_cost(&profile, &m.radio, &m.device, 0, 1.0, 1e7, 3.162e-12, 5).unwrap();
        assert!(rel(tx.delay, 0.0625) < 1e-12);
        assert!(rel(tx.energy, tx.power * tx.delay) < 1e-12);
    }

    #[test]
    fn transmit_cost_power_budget() {
        let radio = RadioParams { n0: 1.26e-20, noise_figure: 1.0, ..Default::default() };
        let m = toy_model();
        let p = transmit_power(&radio, 10.0, 1e7, 3.162e-12);
        assert!(rel(p, 0.3985) < 1e-3, "{p}");
        let err = transmit_cost(&m.profile, &radio, &m.device, 0, 10.0, 1e7, 3.162e-12, 5).unwrap_err();
        assert!(matches!(err, Error::PowerExceeded { .. }));
    }

    #[test]
    fn remote_delay_examples() {
        let m = toy_model();
        assert_eq!(remote_delay(&m.profile, &m.server, m.last_sp(), 0.3, 5).unwrap(), 0.0);
        // 2e8 FLOPs remain after k = 1
        let d = remote_delay(&m.profile, &m.server, 1, 0.5, 5).unwrap();
        assert!(rel(d, 2.2222e-4) < 1e-4, "{d}");
        let d_half = remote_delay(&m.profile, &m.server, 1, 0.25, 5).unwrap();
        assert!(rel(d_half, 2.0 * d) < 1e-12);
        assert!(matches!(remote_delay(&m.profile, &m.server, 1, 0.0, 5), Err(Error::InvalidAvailability(_))));
        assert!(remote_delay(&m.profile, &m.server, 1, -0.1, 5).is_err());
    }

    #[test]
    fn slot_cost_empty_batch_and_full_local() {
        let m = toy_model();
        let ctx = SlotContext { t: 0, batch_size: 0, channel_gain: 1e-12, alpha_r: 0.5 };
        assert_eq!(m.slot_cost(&ResourceDecision::IDLE, &ctx).unwrap(), CostBreakdown::default());

        let ctx = SlotContext { batch_size: 4, ..ctx };
        let d = ResourceDecision { k: m.last_sp(), gamma: 0.0, bandwidth: 0.0, f_local: 1e9 };
        let c = m.slot_cost(&d, &ctx).unwrap();
        assert_eq!((c.d_tx, c.e_tx, c.d_remote), (0.0, 0.0, 0.0));
        assert_eq!(c.d_total, c.d_local);
        assert_eq!(c.e_total, c.e_local);

        let bad = ResourceDecision { bandwidth: 1e6, ..d };
        assert!(m.slot_cost(&bad, &ctx).is_err());
    }

    #[test]
    fn slot_cost_matches_components() {
        let m = toy_model();
        let ctx = SlotContext { t: 3, batch_size: 7, channel_gain: 2e-12, alpha_r: 0.4 };
        let d = ResourceDecision { k: 1, gamma: 2.0, bandwidth: 5e6, f_local: 8e8 };
        let c = m.slot_cost(&d, &ctx).unwrap();
        // recompute each term by hand
        let b = 7.0;
        let d_local = b * 7e7 / (50.0 * 8e8);
        let e_local = b * 7e7 * 1.097e-27 * 8e8 * 8e8 / 50.0;
        let d_tx = 1.25 * 200_000.0 * b / (2.0 * 5e6);
        let p = 2.0 * m.radio.n0 * m.radio.noise_figure * 5e6 / 2e-12;
        let d_remote = 2e8 * b / (2000.0 * 0.4 * 4.5e9);
        assert!(rel(c.d_local, d_local) < 1e-12);
        assert!(rel(c.e_local, e_local) < 1e-12);
        assert!(rel(c.d_tx, d_tx) < 1e-12);
        assert!(rel(c.p_tx, p) < 1e-12);
        assert!(rel(c.e_tx, p * d_tx) < 1e-12);
        assert!(rel(c.d_remote, d_remote) < 1e-12);
        assert_eq!(c.d_total, c.d_local + c.d_tx + c.d_remote);
        assert_eq!(c.e_total, c.e_local + c.e_tx);
    }
}
