//! Plain comma-separated file formats.
//!
//! * split profiles: header `k,L,F`, one row per splitting point;
//! * accuracy tables: `snr_db,<g1>,...`, then `k,<acc>...` rows, then `noiseless,<acc>`;
//! * per-slot traces: `t,batch,h2,alpha_r,k,gamma_db,W,f_l,d_total,e_total,acc,Z,Y`.
//!
//! Floats are written with Rust's shortest round-trip representation, so a
//! value read back is bit-identical to the value written.

mod lut;
mod profile;
mod trace;

pub use lut::{parse_lut, write_lut};
pub use profile::{parse_profile, write_profile};
pub use trace::{write_trace, TRACE_HEADER};

use thiserror::Error;

/// A malformed file, located by 1-based line and column (field) number.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line 1: bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}, column {column}: {message}")]
    Field { line: usize, column: usize, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Model(#[from] dnnsplit_core::Error),
}

fn field<T: std::str::FromStr>(raw: &str, line: usize, column: usize, what: &str) -> Result<T, ParseError> {
    raw.trim().parse().map_err(|_| ParseError::Field {
        line,
        column,
        message: format!("expected {what}, found `{}`", raw.trim()),
    })
}

/// Non-blank lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}
