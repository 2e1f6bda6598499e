//! Decibel conversions. Everything inside the crate is linear SI; these are
//! only used at configuration and reporting boundaries.

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

/// `dBm/Hz` to `W/Hz`.
pub fn dbm_per_hz_to_watt(dbm_hz: f64) -> f64 {
    db_to_linear(dbm_hz - 30.0)
}
