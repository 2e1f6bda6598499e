//! Experiment configuration.
//!
//! The file is TOML with units spelled out in key names. Decibel values are
//! converted to linear exactly once, here. Loading happens in two stages so
//! the CLI can tell a file that does not parse (exit 1) from one whose values
//! are inconsistent (exit 2); the second stage collects every problem it
//! finds instead of stopping at the first.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use dnnsplit_core::summary::Feasibility;
use dnnsplit_core::units::{db_to_linear, dbm_per_hz_to_watt};
use dnnsplit_core::{
    AccuracyLut, DeviceParams, EnvironmentParams, RadioParams, RunConfig, ServerParams, SynthShape, SystemModel,
};

use crate::formats::{parse_lut, parse_profile, ParseError};
use crate::policy::PolicySpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: u64,
    pub n_slots: u64,
    #[serde(default = "default_transient")]
    pub transient_fraction: f64,
    /// Relative tolerance on both long-term constraints when judging a run.
    #[serde(default = "default_slack")]
    pub constraint_slack: f64,
    /// Largest `Z(N)/N` and `Y(N)/N` a run may end with and still count as feasible.
    #[serde(default = "default_stability")]
    pub stability_threshold: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub device: RawDevice,
    pub server: RawServer,
    pub radio: RawRadio,
    pub environment: RawEnvironment,
    pub controller: RawController,
    pub profile: RawProfile,
    pub accuracy: RawAccuracy,
    pub sweep: RawSweep,
}

fn default_transient() -> f64 {
    0.1
}
fn default_slack() -> f64 {
    0.05
}
fn default_stability() -> f64 {
    1e-3
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDevice {
    pub f_l_min_hz: f64,
    pub f_l_max_hz: f64,
    pub eta_l_flops_per_cycle: f64,
    pub kappa: f64,
    pub p_tx_max_w: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawServer {
    pub f_r_max_hz: f64,
    pub eta_r_flops_per_cycle: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRadio {
    pub n0_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub w_max_hz: f64,
    pub rolloff: f64,
    pub snr_grid_db: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEnvironment {
    pub arrival_rate: f64,
    #[serde(default)]
    pub alpha_floor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawController {
    pub mu: f64,
    pub lambda_y: f64,
    pub d_avg_s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProfile {
    /// Relative paths resolve against the config file's directory.
    pub file: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAccuracy {
    pub file: Option<PathBuf>,
    pub synthetic: Option<RawSynth>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSynth {
    pub g_max: f64,
    pub depth_slope: f64,
    pub snr_slope_per_db: f64,
    pub midpoint_sp: f64,
    pub midpoint_snr_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub v: Vec<f64>,
    pub g_avg: Vec<f64>,
    pub path_loss_db: Vec<f64>,
    pub policies: Vec<String>,
}

/// One violated invariant, located by its config key.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: ParseError },
    #[error("{} semantic error(s):\n{}", .0.len(), .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Semantic(Vec<Diagnostic>),
}

impl ConfigError {
    pub fn is_semantic(&self) -> bool {
        matches!(self, ConfigError::Semantic(_))
    }
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: SystemModel,
    pub lut: AccuracyLut,
    pub arrival_rate: f64,
    pub alpha_floor: f64,
    pub mu: f64,
    pub lambda_y: f64,
    pub d_avg: f64,
    pub run: RunConfig,
    /// Rule for accepting a run during V selection.
    pub feasibility: Feasibility,
    pub v_list: Vec<f64>,
    pub g_avg_list: Vec<f64>,
    pub path_loss_db_list: Vec<f64>,
    pub policies: Vec<PolicySpec>,
    pub output_dir: PathBuf,
}

impl Experiment {
    pub fn environment(&self, path_loss_db: f64) -> EnvironmentParams {
        EnvironmentParams {
            path_loss: db_to_linear(path_loss_db),
            arrival_rate: self.arrival_rate,
            alpha_floor: self.alpha_floor,
        }
    }
}

pub fn parse_raw(text: &str, path: &Path) -> Result<RawConfig, ConfigError> {
    toml::from_str(text).map_err(|source| ConfigError::Toml { path: path.to_path_buf(), source })
}

/// Read, parse and validate a config file.
pub fn load(path: &Path) -> Result<Experiment, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    let raw = parse_raw(&text, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve(&raw, base)
}

/// Every problem with `path`, empty when the config is valid.
pub fn validate_config(path: &Path) -> Result<Vec<Diagnostic>, ConfigError> {
    match load(path) {
        Ok(_) => Ok(Vec::new()),
        Err(ConfigError::Semantic(d)) => Ok(d),
        Err(e) => Err(e),
    }
}

struct Checker(Vec<Diagnostic>);

impl Checker {
    fn fail(&mut self, location: &str, message: impl Into<String>) {
        self.0.push(Diagnostic { location: location.into(), message: message.into() });
    }

    fn positive(&mut self, location: &str, x: f64) {
        if !(x.is_finite() && x > 0.0) {
            self.fail(location, format!("must be finite and > 0, found {x}"));
        }
    }

    fn nonempty<T>(&mut self, location: &str, xs: &[T]) {
        if xs.is_empty() {
            self.fail(location, "must not be empty");
        }
    }
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Validate `raw` and load the files it references (relative to `base`).
pub fn resolve(raw: &RawConfig, base: &Path) -> Result<Experiment, ConfigError> {
    let mut c = Checker(Vec::new());

    if raw.n_slots == 0 {
        c.fail("n_slots", "must be >= 1");
    }
    if !(0.0..1.0).contains(&raw.transient_fraction) {
        c.fail("transient_fraction", format!("must lie in [0, 1), found {}", raw.transient_fraction));
    }
    if !(raw.constraint_slack.is_finite() && raw.constraint_slack >= 0.0) {
        c.fail("constraint_slack", "must be finite and >= 0");
    }
    if !(raw.stability_threshold.is_finite() && raw.stability_threshold > 0.0) {
        c.fail("stability_threshold", "must be finite and > 0");
    }

    let d = &raw.device;
    c.positive("device.f_l_min_hz", d.f_l_min_hz);
    c.positive("device.f_l_max_hz", d.f_l_max_hz);
    if d.f_l_min_hz > d.f_l_max_hz {
        c.fail(
            "device.f_l_min_hz",
            format!("device.f_l_min_hz ({}) exceeds device.f_l_max_hz ({})", d.f_l_min_hz, d.f_l_max_hz),
        );
    }
    c.positive("device.eta_l_flops_per_cycle", d.eta_l_flops_per_cycle);
    c.positive("device.kappa", d.kappa);
    c.positive("device.p_tx_max_w", d.p_tx_max_w);

    c.positive("server.f_r_max_hz", raw.server.f_r_max_hz);
    c.positive("server.eta_r_flops_per_cycle", raw.server.eta_r_flops_per_cycle);

    let r = &raw.radio;
    if !r.n0_dbm_hz.is_finite() {
        c.fail("radio.n0_dbm_hz", "must be finite");
    }
    if !(r.noise_figure_db.is_finite() && r.noise_figure_db >= 0.0) {
        c.fail("radio.noise_figure_db", "must be finite and >= 0 dB");
    }
    c.positive("radio.w_max_hz", r.w_max_hz);
    if !(0.0..=1.0).contains(&r.rolloff) {
        c.fail("radio.rolloff", format!("must lie in [0, 1], found {}", r.rolloff));
    }
    c.nonempty("radio.snr_grid_db", &r.snr_grid_db);
    if r.snr_grid_db.iter().any(|x| !x.is_finite()) {
        c.fail("radio.snr_grid_db", "values must be finite");
    }
    if r.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
        c.fail("radio.snr_grid_db", "must be strictly increasing");
    }

    let e = &raw.environment;
    if !(e.arrival_rate.is_finite() && e.arrival_rate >= 0.0) {
        c.fail("environment.arrival_rate", "must be finite and >= 0");
    }
    if !(0.0..1.0).contains(&e.alpha_floor) {
        c.fail("environment.alpha_floor", "must lie in [0, 1)");
    }

    let k = &raw.controller;
    c.positive("controller.mu", k.mu);
    if !(k.lambda_y.is_finite() && k.lambda_y >= 0.0) {
        c.fail("controller.lambda_y", "must be finite and >= 0");
    }
    c.positive("controller.d_avg_s", k.d_avg_s);

    let s = &raw.sweep;
    c.nonempty("sweep.v", &s.v);
    for &v in &s.v {
        c.positive("sweep.v", v);
    }
    c.nonempty("sweep.g_avg", &s.g_avg);
    if s.g_avg.iter().any(|g| !(0.0..=1.0).contains(g)) {
        c.fail("sweep.g_avg", "targets must lie in [0, 1]");
    }
    c.nonempty("sweep.path_loss_db", &s.path_loss_db);
    if s.path_loss_db.iter().any(|x| !x.is_finite()) {
        c.fail("sweep.path_loss_db", "values must be finite");
    }
    c.nonempty("sweep.policies", &s.policies);
    let mut policies = Vec::new();
    for p in &s.policies {
        match p.parse::<PolicySpec>() {
            Ok(spec) => policies.push(spec),
            Err(msg) => c.fail("sweep.policies", msg),
        }
    }

    // referenced files: a missing file is a semantic problem, a malformed one a parse error
    let profile_path = resolve_path(base, &raw.profile.file);
    let profile = read_referenced(&mut c, "profile.file", &profile_path, parse_profile)?;

    let a = &raw.accuracy;
    let lut_source = match (&a.file, &a.synthetic) {
        (Some(_), Some(_)) => {
            c.fail("accuracy", "set either `file` or `synthetic`, not both");
            None
        }
        (None, None) => {
            c.fail("accuracy", "one of `file` or `synthetic` is required");
            None
        }
        (Some(f), None) => Some(Ok(resolve_path(base, f))),
        (None, Some(s)) => Some(Err(SynthShape {
            g_max: s.g_max,
            depth_slope: s.depth_slope,
            snr_slope: s.snr_slope_per_db,
            midpoint_sp: s.midpoint_sp,
            midpoint_snr_db: s.midpoint_snr_db,
        })),
    };

    let radio = RadioParams {
        n0: dbm_per_hz_to_watt(r.n0_dbm_hz),
        noise_figure: db_to_linear(r.noise_figure_db),
        w_max: r.w_max_hz,
        beta: r.rolloff,
        snr_grid: r.snr_grid_db.iter().map(|&x| db_to_linear(x)).collect(),
    };

    let lut = match lut_source {
        Some(Ok(path)) => read_referenced(&mut c, "accuracy.file", &path, parse_lut)?,
        Some(Err(shape)) => match (&profile, shape.validate()) {
            (_, Err(e)) => {
                c.fail("accuracy.synthetic", e.to_string());
                None
            }
            (Some(p), Ok(())) if c.0.is_empty() => {
                Some(AccuracyLut::synthetic(p.last_sp(), &radio.snr_grid, &shape).map_err(|e| {
                    ConfigError::Semantic(vec![Diagnostic {
                        location: "accuracy.synthetic".into(),
                        message: e.to_string(),
                    }])
                })?)
            }
            _ => None,
        },
        None => None,
    };

    if let (Some(p), Some(l)) = (&profile, &lut) {
        if r.snr_grid_db.windows(2).all(|w| w[0] < w[1]) {
            if let Err(e) = l.check_compatible(p.last_sp(), &radio.snr_grid) {
                c.fail("accuracy.file", format!("{e} (radio.snr_grid_db = {:?})", r.snr_grid_db));
            }
        }
    }

    if !c.0.is_empty() {
        return Err(ConfigError::Semantic(c.0));
    }
    let (profile, lut) = (profile.expect("checked"), lut.expect("checked"));
    Ok(Experiment {
        model: SystemModel {
            profile,
            device: DeviceParams {
                f_l_min: d.f_l_min_hz,
                f_l_max: d.f_l_max_hz,
                eta_l: d.eta_l_flops_per_cycle,
                kappa: d.kappa,
                p_tx_max: d.p_tx_max_w,
            },
            server: ServerParams { f_r_max: raw.server.f_r_max_hz, eta_r: raw.server.eta_r_flops_per_cycle },
            radio,
        },
        lut,
        arrival_rate: e.arrival_rate,
        alpha_floor: e.alpha_floor,
        mu: k.mu,
        lambda_y: k.lambda_y,
        d_avg: k.d_avg_s,
        run: RunConfig {
            n_slots: raw.n_slots,
            seed: raw.seed,
            transient_fraction: raw.transient_fraction,
            record_trace: false,
        },
        feasibility: Feasibility::new(raw.constraint_slack, raw.stability_threshold),
        v_list: s.v.clone(),
        g_avg_list: s.g_avg.clone(),
        path_loss_db_list: s.path_loss_db.clone(),
        policies,
        output_dir: raw.output_dir.clone(),
    })
}

fn read_referenced<T>(
    c: &mut Checker,
    location: &str,
    path: &Path,
    parse: impl Fn(&str) -> Result<T, ParseError>,
) -> Result<Option<T>, ConfigError> {
    match std::fs::read_to_string(path) {
        Ok(text) => parse(&text).map(Some).map_err(|source| ConfigError::File { path: path.to_path_buf(), source }),
        Err(err) => {
            c.fail(location, format!("cannot read {}: {err}", path.display()));
            Ok(None)
        }
    }
}

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");
/// The MobileNetV2-shaped profile the default configuration refers to.
pub const DEFAULT_PROFILE: &str = include_str!("../configs/mobilenetv2.csv");

/// Path of the default configuration inside the source tree.
pub fn default_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml")
}
