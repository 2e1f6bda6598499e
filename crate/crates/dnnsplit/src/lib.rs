//! Configuration, file formats, parameter sweeps and the command line front
//! end for [`dnnsplit_core`].

pub mod config;
pub mod experiment;
pub mod formats;
pub mod policy;

pub use dnnsplit_core as core;
