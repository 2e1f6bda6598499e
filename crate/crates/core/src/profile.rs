//! A DNN described by its admissible splitting points.

use alloc::vec::Vec;

use crate::{Error, Result};

/// One splitting point: the features produced at the cut and the FLOPs of the
/// layers between the previous cut and this one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    /// Real scalars emitted at this cut (two are packed per complex symbol).
    pub features: u64,
    pub flops: f64,
}

/// Splitting points `0..=J`. Point 0 ships the raw input, point `J` keeps
/// everything on the device.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProfile {
    stages: Vec<Stage>,
    cumulative: Vec<f64>,
}

impl SplitProfile {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        if stages.len() < 2 {
            return Err(Error::InvalidParameter { name: "profile", reason: "needs at least two splitting points" });
        }
        for s in &stages {
            if s.features == 0 {
                return Err(Error::InvalidParameter { name: "profile", reason: "feature count must be >= 1" });
            }
            if !(s.flops.is_finite() && s.flops >= 0.0) {
                return Err(Error::InvalidParameter { name: "profile", reason: "FLOPs must be finite and >= 0" });
            }
        }
        let cumulative = stages
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.flops;
                Some(*acc)
            })
            .collect();
        Ok(Self { stages, cumulative })
    }

    /// Index `J` of the last splitting point.
    #[inline]
    pub fn last_sp(&self) -> usize {
        self.stages.len() - 1
    }

    #[inline]
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn features(&self, k: usize) -> Result<u64> {
        self.check(k)?;
        Ok(self.stages[k].features)
    }

    /// FLOPs of layers `0..=k`.
    pub fn cumulative_flops(&self, k: usize) -> Result<f64> {
        self.check(k)?;
        Ok(self.cumulative[k])
    }

    #[inline]
    pub fn total_flops(&self) -> f64 {
        self.cumulative[self.last_sp()]
    }

    fn check(&self, k: usize) -> Result<()> {
        if k > self.last_sp() {
            Err(Error::SplitOutOfRange { k, last: self.last_sp() })
        } else {
            Ok(())
        }
    }
}
