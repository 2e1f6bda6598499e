use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    SplitOutOfRange {
        k: usize,
        last: usize,
    },
    /// Local computation requested outside `[f_l_min, f_l_max]` (or with a
    /// nonzero clock under full offloading).
    FrequencyOutOfBounds {
        k: usize,
        f_local: f64,
    },
    /// Transmission requested with a bandwidth outside `(0, W_max]`, or a
    /// nonzero bandwidth for full local computation.
    BandwidthOutOfBounds {
        k: usize,
        bandwidth: f64,
    },
    PowerExceeded {
        p_tx: f64,
        p_tx_max: f64,
    },
    InvalidAvailability(f64),
    SnrOffGrid(f64),
    GridMismatch(String),
    InvalidPolicy(String),
    ConfigMismatch(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::SplitOutOfRange { k, last } => {
                write!(f, "splitting point {k} out of range 0..={last}")
            }
            Error::FrequencyOutOfBounds { k, f_local } => {
                write!(f, "local frequency {f_local} Hz not admissible at splitting point {k}")
            }
            Error::BandwidthOutOfBounds { k, bandwidth } => {
                write!(f, "bandwidth {bandwidth} Hz not admissible at splitting point {k}")
            }
            Error::PowerExceeded { p_tx, p_tx_max } => {
                write!(f, "transmit power {p_tx} W exceeds budget {p_tx_max} W")
            }
            Error::InvalidAvailability(a) => {
                write!(f, "server availability {a} outside (0, 1]")
            }
            Error::SnrOffGrid(g) => write!(f, "SNR {g} (linear) is not on the accuracy grid"),
            Error::GridMismatch(msg) => write!(f, "SNR grid mismatch: {msg}"),
            Error::InvalidPolicy(msg) => write!(f, "invalid policy: {msg}"),
            Error::ConfigMismatch(what) => write!(f, "runs are not comparable: {what} differs"),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for Error {}
