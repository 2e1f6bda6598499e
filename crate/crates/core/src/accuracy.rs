//! Inference accuracy `G(k, gamma)` as a look-up table over splitting points
//! and the admissible SNR grid.
//!
//! Full local computation (`k = J`) involves no channel, so it always reports
//! the noiseless accuracy regardless of `gamma`. Between grid points nothing
//! is interpolated: a lookup off the grid is an error.

use alloc::vec::Vec;

use crate::units::linear_to_db;
use crate::{Error, Result};

/// Relative tolerance used to match an SNR against the grid.
const GRID_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyLut {
    snr_grid: Vec<f64>,
    snr_db: Vec<f64>,
    /// Row-major, `(J + 1) x snr_grid.len()`.
    table: Vec<f64>,
    noiseless: f64,
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "accuracy", reason: "entries must lie in [0, 1]" })
    }
}

impl AccuracyLut {
    /// Build from an SNR grid in dB and one row per splitting point.
    pub fn from_db(snr_db: Vec<f64>, rows: Vec<Vec<f64>>, noiseless: f64) -> Result<Self> {
        let snr_grid = snr_db.iter().map(|&db| crate::units::db_to_linear(db)).collect();
        Self::build(snr_grid, snr_db, rows, noiseless)
    }

    /// Build from a linear SNR grid and one row per splitting point.
    pub fn from_linear(snr_grid: Vec<f64>, rows: Vec<Vec<f64>>, noiseless: f64) -> Result<Self> {
        let snr_db = snr_grid.iter().map(|&g| linear_to_db(g)).collect();
        Self::build(snr_grid, snr_db, rows, noiseless)
    }

    fn build(snr_grid: Vec<f64>, snr_db: Vec<f64>, rows: Vec<Vec<f64>>, noiseless: f64) -> Result<Self> {
        crate::params::validate_grid(&snr_grid)?;
        if rows.len() < 2 {
            return Err(Error::InvalidParameter { name: "accuracy", reason: "needs at least two splitting points" });
        }
        let width = snr_grid.len();
        let mut table = Vec::with_capacity(rows.len() * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::InvalidParameter { name: "accuracy", reason: "row width differs from SNR grid" });
            }
            for x in row {
                check_unit(x)?;
                table.push(x);
            }
        }
        check_unit(noiseless)?;
        Ok(Self { snr_grid, snr_db, table, noiseless })
    }

    /// Synthetic table `g_max * logistic(a (k - k0) + b (gamma_dB - gamma0_dB))`,
    /// strictly increasing in both the splitting point and the SNR.
    pub fn synthetic(last_sp: usize, snr_grid: &[f64], shape: &SynthShape) -> Result<Self> {
        shape.validate()?;
        let rows = (0..=last_sp)
            .map(|k| {
                snr_grid
                    .iter()
                    .map(|&g| {
                        let x = shape.depth_slope * (k as f64 - shape.midpoint_sp)
                            + shape.snr_slope * (linear_to_db(g) - shape.midpoint_snr_db);
                        shape.g_max * logistic(x)
                    })
                    .collect()
            })
            .collect();
        Self::from_linear(snr_grid.to_vec(), rows, shape.g_max)
    }

    pub fn last_sp(&self) -> usize {
        self.table.len() / self.snr_grid.len() - 1
    }

    pub fn snr_grid(&self) -> &[f64] {
        &self.snr_grid
    }

    pub fn snr_db(&self) -> &[f64] {
        &self.snr_db
    }

    pub fn noiseless(&self) -> f64 {
        self.noiseless
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.snr_grid.len();
        &self.table[k * w..(k + 1) * w]
    }

    pub fn grid_index(&self, gamma: f64) -> Option<usize> {
        self.snr_grid.iter().position(|&g| (g - gamma).abs() <= GRID_RTOL * g)
    }

    /// `G(k, gamma)`.
    pub fn lookup(&self, k: usize, gamma: f64) -> Result<f64> {
        let last = self.last_sp();
        if k > last {
            return Err(Error::SplitOutOfRange { k, last });
        }
        if k == last {
            return Ok(self.noiseless);
        }
        let i = self.grid_index(gamma).ok_or(Error::SnrOffGrid(gamma))?;
        Ok(self.row(k)[i])
    }

    /// `G(k, snr_grid[i])` by grid position.
    #[inline]
    pub fn at(&self, k: usize, i: usize) -> f64 {
        if k == self.last_sp() {
            self.noiseless
        } else {
            self.table[k * self.snr_grid.len() + i]
        }
    }

    /// Checks that this table covers exactly `last_sp + 1` splitting points and the given grid.
    pub fn check_compatible(&self, last_sp: usize, snr_grid: &[f64]) -> Result<()> {
        if self.last_sp() != last_sp {
            return Err(Error::GridMismatch(alloc::format!(
                "table has {} splitting points, profile has {}",
                self.last_sp() + 1,
                last_sp + 1
            )));
        }
        if self.snr_grid.len() != snr_grid.len() {
            return Err(Error::GridMismatch(alloc::format!(
                "table has {} SNR values, radio grid has {}",
                self.snr_grid.len(),
                snr_grid.len()
            )));
        }
        for (i, (&a, &b)) in self.snr_grid.iter().zip(snr_grid).enumerate() {
            if (a - b).abs() > GRID_RTOL * b {
                return Err(Error::GridMismatch(alloc::format!(
                    "entry {i}: table {:.3} dB vs radio {:.3} dB",
                    linear_to_db(a),
                    linear_to_db(b)
                )));
            }
        }
        Ok(())
    }
}

#[inline]
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Parameters of the synthetic accuracy surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthShape {
    /// Accuracy ceiling, also used as the noiseless accuracy.
    pub g_max: f64,
    /// Logistic slope per splitting point.
    pub depth_slope: f64,
    /// Logistic slope per dB of SNR.
    pub snr_slope: f64,
    pub midpoint_sp: f64,
    pub midpoint_snr_db: f64,
}

impl Default for SynthShape {
    fn default() -> Self {
        Self { g_max: 0.93, depth_slope: 0.25, snr_slope: 0.15, midpoint_sp: 3.0, midpoint_snr_db: 0.0 }
    }
}

impl SynthShape {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_max > 0.0 && self.g_max <= 1.0) {
            return Err(Error::InvalidParameter { name: "g_max", reason: "must lie in (0, 1]" });
        }
        if !(self.depth_slope.is_finite() && self.depth_slope > 0.0) {
            return Err(Error::InvalidParameter { name: "depth_slope", reason: "must be finite and > 0" });
        }
        if !(self.snr_slope.is_finite() && self.snr_slope > 0.0) {
            return Err(Error::InvalidParameter { name: "snr_slope", reason: "must be finite and > 0" });
        }
        if !(self.midpoint_sp.is_finite() && self.midpoint_snr_db.is_finite()) {
            return Err(Error::InvalidParameter { name: "midpoint", reason: "must be finite" });
        }
        Ok(())
    }
}
