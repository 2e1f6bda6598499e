//! Joint selection of DNN splitting point, transmit SNR, bandwidth and local
//! CPU frequency for energy-frugal edge inference.
//!
//! Each slot an edge device receives a batch of inference requests. It runs
//! the first `k` layers of a DNN locally, ships the intermediate features over
//! a fading uplink with analog modulation and lets an edge server finish the
//! job. The [`controller`] picks the split and the radio/compute resources with
//! a drift-plus-penalty rule that minimizes device energy while two virtual
//! queues enforce long-term average delay and accuracy targets. The [`sim`]
//! module drives the controller through a stochastic environment and collects
//! time averages.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line front end live in the `dnnsplit` companion crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod accuracy;
pub mod controller;
pub mod cost;
mod error;
pub mod params;
pub mod profile;
pub mod sim;
pub mod summary;
pub mod units;

pub use accuracy::{AccuracyLut, SynthShape};
pub use controller::{ControllerState, PolicyKind, SlotDecisionReport};
pub use cost::{CostBreakdown, ResourceDecision, SlotContext, SystemModel};
pub use error::{Error, Result};
pub use params::{DeviceParams, RadioParams, ServerParams};
pub use profile::{SplitProfile, Stage};
pub use sim::{EnvironmentParams, RunConfig, RunResult, SlotRecord};
