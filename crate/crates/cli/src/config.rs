//! Per-subcommand settings and their resolution: flags over `--config` file
//! over built-in defaults.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2};
use std::path::{Path, PathBuf};

use gridcut_core::embed::ForceVariant;
use gridcut_core::optim::{Algorithm, GradientMethod};
use gridcut_core::qaoa::Lattice;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParseConfig {
    pub case: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub graph: Option<PathBuf>,
    pub case: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    pub graph: Option<PathBuf>,
    pub case: Option<PathBuf>,
    pub registers: usize,
    /// μm² per vertex.
    pub area_per_vertex: f64,
    pub iterations: usize,
    /// μm.
    pub temperature: f64,
    pub rho: f64,
    pub variant: ForceVariant,
    pub weighted: bool,
    pub seed: u64,
    /// Length of the scoring pulse, μs.
    pub t_max: f64,
    pub dt: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            graph: None,
            case: None,
            registers: 50,
            area_per_vertex: 6.5 * 6.5,
            iterations: 300,
            temperature: 5.0,
            rho: 0.5,
            variant: ForceVariant::Rydberg,
            weighted: true,
            seed: 0,
            t_max: 4.0,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticConfig {
    pub graph: Option<PathBuf>,
    pub case: Option<PathBuf>,
    pub registers: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub algorithm: Algorithm,
    pub dt: f64,
    pub final_dt: f64,
    pub shots: u64,
    pub seed: u64,
    pub t_max: f64,
    pub knots: usize,
    pub area_per_vertex: f64,
    pub iterations: usize,
    pub temperature: f64,
    pub rho: f64,
    pub variant: ForceVariant,
    pub weighted: bool,
    pub p01: f64,
    pub p10: f64,
    /// Initial peak amplitude, MHz (default 0.8 of the hardware maximum).
    pub p0_mhz: Option<f64>,
    pub p1: Option<f64>,
    /// Initial detuning scale, MHz (default half the hardware maximum).
    pub p2_mhz: Option<f64>,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        let e = EmbedConfig::default();
        Self {
            graph: None,
            case: None,
            registers: 50,
            steps: 100,
            learning_rate: 0.02,
            algorithm: Algorithm::Nadam,
            dt: 1e-3,
            final_dt: 1e-4,
            shots: 0,
            seed: 0,
            t_max: 4.0,
            knots: gridcut_core::pulseopt::DEFAULT_KNOTS,
            area_per_vertex: e.area_per_vertex,
            iterations: e.iterations,
            temperature: e.temperature,
            rho: e.rho,
            variant: e.variant,
            weighted: e.weighted,
            p01: 0.0,
            p10: 0.0,
            p0_mhz: None,
            p1: None,
            p2_mhz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaConfig {
    pub graph: Option<PathBuf>,
    pub case: Option<PathBuf>,
    pub layout: Option<PathBuf>,
    /// Generate a lattice instance instead of reading graph and layout.
    pub lattice: Option<Lattice>,
    pub vertices: Option<usize>,
    pub lattice_seed: u64,
    /// Rescale the layout so its closest pair sits at the lattice spacing.
    pub rescale: bool,
    pub layers: usize,
    pub seeds: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub algorithm: Algorithm,
    pub gradient: GradientMethod,
    pub patience: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub vanilla: bool,
    pub omega_prep_mhz: f64,
    pub omega_mixer_mhz: f64,
    pub phi_prep: f64,
    pub phi_mixer: f64,
    /// μm.
    pub lattice_spacing: f64,
    /// μs.
    pub layer_cap: f64,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        let opt = gridcut_core::qaoa::default_qaoa_optimizer();
        Self {
            graph: None,
            case: None,
            layout: None,
            lattice: None,
            vertices: None,
            lattice_seed: 0,
            rescale: false,
            layers: 10,
            seeds: 20,
            steps: opt.max_steps,
            learning_rate: opt.learning_rate,
            algorithm: opt.algorithm,
            gradient: opt.gradient,
            patience: opt.patience,
            tolerance: opt.convergence_tol,
            seed: 0,
            vanilla: false,
            // 5π and 2 rad/μs
            omega_prep_mhz: 2.5,
            omega_mixer_mhz: FRAC_1_PI,
            phi_prep: -FRAC_PI_2,
            phi_mixer: 0.0,
            lattice_spacing: 12.0,
            layer_cap: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub graph: Option<PathBuf>,
    pub case: Option<PathBuf>,
    pub layout: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
    pub cycles: usize,
    pub t_cycle: f64,
    pub shots: u64,
    pub reference_shots: u64,
    pub seed: u64,
    pub p01: f64,
    pub p10: f64,
    pub incremental: bool,
    pub dt: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            graph: None,
            case: None,
            layout: None,
            schedule: None,
            cycles: 16,
            t_cycle: 0.25,
            shots: 0,
            reference_shots: 0,
            seed: 0,
            p01: 0.0,
            p10: 0.0,
            incremental: false,
            dt: 1e-4,
        }
    }
}

/// Reads a config file. A manifest written by an earlier run is accepted as
/// well; its `config` object is used after checking the command matches.
fn read_config_file(command: &str, path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::Usage(format!("{} must hold a JSON object", path.display())));
    };
    if obj.contains_key("command") && obj.contains_key("config") {
        let found = obj.get("command").and_then(Value::as_str).unwrap_or_default();
        if found != command {
            return Err(CliError::Usage(format!("manifest {} is for `{found}`, not `{command}`", path.display())));
        }
        return match obj.remove("config") {
            Some(Value::Object(cfg)) => Ok(cfg),
            _ => Err(CliError::Usage(format!("manifest {} has no config object", path.display()))),
        };
    }
    Ok(obj)
}

/// Defaults, then the file at `config_path`, then every flag that was given.
pub fn resolve<C, F>(command: &str, config_path: Option<&Path>, flags: &F) -> Result<C, CliError>
where
    C: Default + Serialize + DeserializeOwned,
    F: Serialize,
{
    let Value::Object(mut merged) = serde_json::to_value(C::default()).expect("defaults serialize") else {
        unreachable!("configs are structs")
    };
    let mut overlay = |layer: Map<String, Value>, source: &str| -> Result<(), CliError> {
        for (k, v) in layer {
            if !merged.contains_key(&k) {
                return Err(CliError::Usage(format!("unknown setting `{k}` in {source}")));
            }
            merged.insert(k, v);
        }
        Ok(())
    };
    if let Some(path) = config_path {
        overlay(read_config_file(command, path)?, &path.display().to_string())?;
    }
    if let Value::Object(given) = serde_json::to_value(flags).expect("flags serialize") {
        overlay(given.into_iter().filter(|(_, v)| !v.is_null()).collect(), "flags")?;
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid {command} settings: {e}")))
}
