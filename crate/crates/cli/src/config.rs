//! Sweep config files: TOML with a strict schema (unknown keys rejected).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use spinchannel::ensemble::SweepConfig;

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// On-disk sweep configuration: the sweep grid plus CLI-only emission
/// switches. Field semantics match [`SweepConfig`].
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub n: usize,
    #[serde(default = "default_j")]
    pub j: f64,
    pub g_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    #[serde(default)]
    pub omega_s: f64,
    #[serde(default)]
    pub omega_r: f64,
    pub samples: usize,
    pub master_seed: u64,
    #[serde(default = "default_window_mult")]
    pub window_mult: f64,
    #[serde(default = "default_coarse_per_tau")]
    pub coarse_per_tau: usize,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default)]
    pub collect_xi: bool,
    /// Output directory; may instead come from --out or SPINCHANNEL_OUT.
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    /// Also write per-sample occupancy traces (one file per sample).
    #[serde(default)]
    pub emit_trace: bool,
    /// Also write per-sample eigenstate maps (one file per sample).
    #[serde(default)]
    pub emit_eigenmap: bool,
}

fn default_schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_j() -> f64 {
    1.0
}
fn default_window_mult() -> f64 {
    spinchannel::dynamics::DEFAULT_WINDOW_MULT
}
fn default_coarse_per_tau() -> usize {
    spinchannel::dynamics::DEFAULT_COARSE_PER_TAU
}
fn default_bin_width() -> f64 {
    0.01
}
fn default_gap_tol() -> f64 {
    spinchannel::effective::DEFAULT_GAP_TOL
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
    if config.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(CliError::usage(format!(
            "unsupported schema_version {} (this build reads version {})",
            config.schema_version, CONFIG_SCHEMA_VERSION
        )));
    }
    Ok(config)
}

/// Merge the config with command-line overrides. Output directory
/// precedence: --out flag, then SPINCHANNEL_OUT, then the config file.
pub fn resolve(
    config: RunConfig,
    out_flag: Option<PathBuf>,
    samples_flag: Option<usize>,
) -> Result<SweepConfig, CliError> {
    let outputs = out_flag
        .or_else(|| std::env::var_os("SPINCHANNEL_OUT").map(PathBuf::from))
        .or(config.outputs)
        .ok_or_else(|| {
            CliError::usage(
                "no output directory: set `outputs` in the config, pass --out, \
                 or export SPINCHANNEL_OUT",
            )
        })?;
    Ok(SweepConfig {
        n: config.n,
        j: config.j,
        g_list: config.g_list,
        alpha_list: config.alpha_list,
        omega_s: config.omega_s,
        omega_r: config.omega_r,
        samples: samples_flag.unwrap_or(config.samples),
        master_seed: config.master_seed,
        window_mult: config.window_mult,
        coarse_per_tau: config.coarse_per_tau,
        bin_width: config.bin_width,
        gap_tol: config.gap_tol,
        collect_xi: config.collect_xi,
        outputs,
    })
}
