use std::fmt::Write;

use dnnsplit_core::{SplitProfile, Stage};

use super::{field, lines, ParseError};

const HEADER: &str = "k,L,F";

pub fn parse_profile(text: &str) -> Result<SplitProfile, ParseError> {
    let mut it = lines(text);
    match it.next() {
        Some((_, h)) if h.replace(' ', "") == HEADER => {}
        other => {
            return Err(ParseError::Header {
                expected: HEADER.into(),
                found: other.map(|(_, h)| h.to_string()).unwrap_or_default(),
            })
        }
    }
    let mut stages = Vec::new();
    for (line, row) in it {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 3 {
            return Err(ParseError::Line { line, message: format!("expected 3 fields, found {}", cols.len()) });
        }
        let k: usize = field(cols[0], line, 1, "a splitting point index")?;
        if k != stages.len() {
            return Err(ParseError::Field {
                line,
                column: 1,
                message: format!("splitting points must count up from 0; expected {}, found {k}", stages.len()),
            });
        }
        let features: u64 = field(cols[1], line, 2, "a positive feature count")?;
        if features == 0 {
            return Err(ParseError::Field { line, column: 2, message: "feature count must be >= 1".into() });
        }
        let flops: f64 = field(cols[2], line, 3, "a FLOP count")?;
        if !(flops.is_finite() && flops >= 0.0) {
            return Err(ParseError::Field { line, column: 3, message: "FLOPs must be finite and >= 0".into() });
        }
        stages.push(Stage { features, flops });
    }
    Ok(SplitProfile::new(stages)?)
}

pub fn write_profile(profile: &SplitProfile) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (k, s) in profile.stages().iter().enumerate() {
        let _ = writeln!(out, "{k},{},{}", s.features, s.flops);
    }
    out
}
