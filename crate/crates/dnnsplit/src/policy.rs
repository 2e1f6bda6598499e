//! Policy names as they appear in configs and on the command line.

use std::fmt;
use std::str::FromStr;

use dnnsplit_core::units::{db_to_linear, linear_to_db};
use dnnsplit_core::{PolicyKind, SystemModel};

/// A policy entry of a sweep. `bfsp` and `bfsnr` stand for the whole family
/// of fixed-split / fixed-SNR policies; the best member is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Dynamic,
    Flc,
    Bfsp,
    Bfsnr,
    AccuracyUnaware,
    FixedSp(usize),
    FixedSnrDb(f64),
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Ok(match s {
            "dynamic" => PolicySpec::Dynamic,
            "flc" => PolicySpec::Flc,
            "bfsp" => PolicySpec::Bfsp,
            "bfsnr" => PolicySpec::Bfsnr,
            "accuracy-unaware" => PolicySpec::AccuracyUnaware,
            _ => {
                if let Some(k) = s.strip_prefix("fixed-sp:") {
                    PolicySpec::FixedSp(k.parse().map_err(|_| format!("bad splitting point in `{s}`"))?)
                } else if let Some(db) = s.strip_prefix("fixed-snr:") {
                    PolicySpec::FixedSnrDb(db.parse().map_err(|_| format!("bad SNR (dB) in `{s}`"))?)
                } else {
                    return Err(format!(
                        "unknown policy `{s}` (expected dynamic, flc, bfsp, bfsnr, accuracy-unaware, fixed-sp:<k> or fixed-snr:<dB>)"
                    ));
                }
            }
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Dynamic => f.write_str("dynamic"),
            PolicySpec::Flc => f.write_str("flc"),
            PolicySpec::Bfsp => f.write_str("bfsp"),
            PolicySpec::Bfsnr => f.write_str("bfsnr"),
            PolicySpec::AccuracyUnaware => f.write_str("accuracy-unaware"),
            PolicySpec::FixedSp(k) => write!(f, "fixed-sp:{k}"),
            PolicySpec::FixedSnrDb(db) => write!(f, "fixed-snr:{db}"),
        }
    }
}

impl PolicySpec {
    /// Concrete policies this entry stands for.
    pub fn expand(&self, model: &SystemModel) -> Vec<PolicyKind> {
        match *self {
            PolicySpec::Dynamic => vec![PolicyKind::Dynamic],
            PolicySpec::Flc => vec![PolicyKind::FullLocal],
            PolicySpec::AccuracyUnaware => vec![PolicyKind::AccuracyUnaware],
            PolicySpec::Bfsp => (0..=model.last_sp()).map(PolicyKind::FixedSp).collect(),
            PolicySpec::Bfsnr => model.radio.snr_grid.iter().map(|&g| PolicyKind::FixedSnr(g)).collect(),
            PolicySpec::FixedSp(k) => vec![PolicyKind::FixedSp(k)],
            PolicySpec::FixedSnrDb(db) => vec![PolicyKind::FixedSnr(db_to_linear(db))],
        }
    }

    /// Whether runs of this policy must also meet the accuracy target.
    pub fn needs_accuracy(&self) -> bool {
        !matches!(self, PolicySpec::AccuracyUnaware)
    }
}

/// `(name, parameter)` columns for a concrete policy.
pub fn kind_label(kind: &PolicyKind) -> (&'static str, String) {
    match kind {
        PolicyKind::Dynamic => ("dynamic", String::new()),
        PolicyKind::FullLocal => ("flc", String::new()),
        PolicyKind::AccuracyUnaware => ("accuracy-unaware", String::new()),
        PolicyKind::FixedSp(k) => ("fixed-sp", k.to_string()),
        PolicyKind::FixedSnr(g) => ("fixed-snr", format_db(*g)),
    }
}

/// dB value of a grid SNR, rounded to remove conversion noise.
pub fn format_db(gamma: f64) -> String {
    let db = linear_to_db(gamma);
    let r = (db * 1e9).round() / 1e9;
    format!("{r}")
}
