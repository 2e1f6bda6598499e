//! Device, server and radio parameters.
//!
//! `Default` impls carry the reference edge-inference setup: a 1.4 GHz
//! device CPU at 50 FLOPs/cycle, a 4.5 GHz server at 2000 FLOPs/cycle,
//! 300 mW / 10 MHz uplink, -174 dBm/Hz noise with a 5 dB noise figure and
//! an SNR grid of {-5, -4, -3, -2, 0, 5, 10, 20} dB.

use alloc::vec::Vec;

use crate::units::{db_to_linear, dbm_per_hz_to_watt};
use crate::{Error, Result};

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "must be finite and > 0" })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Hz
    pub f_l_min: f64,
    /// Hz
    pub f_l_max: f64,
    /// FLOPs per CPU cycle.
    pub eta_l: f64,
    /// Effective switched capacitance; energy per FLOP is `kappa * f^2 / eta_l`.
    pub kappa: f64,
    /// W
    pub p_tx_max: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self { f_l_min: 1.0e8, f_l_max: 1.4e9, eta_l: 50.0, kappa: 1.097e-27, p_tx_max: 0.3 }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        positive("f_l_min", self.f_l_min)?;
        positive("f_l_max", self.f_l_max)?;
        if self.f_l_min > self.f_l_max {
            return Err(Error::InvalidParameter { name: "f_l_min", reason: "must not exceed f_l_max" });
        }
        positive("eta_l", self.eta_l)?;
        positive("kappa", self.kappa)?;
        positive("p_tx_max", self.p_tx_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerParams {
    /// Hz
    pub f_r_max: f64,
    /// FLOPs per CPU cycle.
    pub eta_r: f64,
}

impl Default for ServerParams {
    fn default() -> Self {
        Self { f_r_max: 4.5e9, eta_r: 2000.0 }
    }
}

impl ServerParams {
    pub fn validate(&self) -> Result<()> {
        positive("f_r_max", self.f_r_max)?;
        positive("eta_r", self.eta_r)
    }
}

pub const DEFAULT_SNR_GRID_DB: [f64; 8] = [-5.0, -4.0, -3.0, -2.0, 0.0, 5.0, 10.0, 20.0];

#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    /// Noise power spectral density, W/Hz.
    pub n0: f64,
    /// Receiver noise figure, linear (>= 1).
    pub noise_figure: f64,
    /// Hz
    pub w_max: f64,
    /// Pulse-shaping roll-off.
    pub beta: f64,
    /// Admissible target SNRs, linear, strictly increasing.
    pub snr_grid: Vec<f64>,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            n0: dbm_per_hz_to_watt(-174.0),
            noise_figure: db_to_linear(5.0),
            w_max: 1.0e7,
            beta: 0.25,
            snr_grid: DEFAULT_SNR_GRID_DB.iter().map(|&db| db_to_linear(db)).collect(),
        }
    }
}

impl RadioParams {
    /// Noise PSD seen after the receiver front end.
    #[inline]
    pub fn n0_eff(&self) -> f64 {
        self.n0 * self.noise_figure
    }

    pub fn validate(&self) -> Result<()> {
        positive("n0", self.n0)?;
        if !(self.noise_figure.is_finite() && self.noise_figure >= 1.0) {
            return Err(Error::InvalidParameter { name: "noise_figure", reason: "must be >= 1 (linear)" });
        }
        positive("w_max", self.w_max)?;
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter { name: "beta", reason: "must lie in [0, 1]" });
        }
        validate_grid(&self.snr_grid)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "snr_grid", reason: "must not be empty" });
    }
    if grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidParameter { name: "snr_grid", reason: "values must be finite and > 0" });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter { name: "snr_grid", reason: "must be strictly increasing" });
    }
    Ok(())
}
