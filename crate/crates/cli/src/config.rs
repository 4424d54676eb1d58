//! Command configurations: a TOML file whose keys mirror the long flags,
//! with flags taking precedence.

use std::path::{Path, PathBuf};

use levy_besov::idlaw::{IndexConvention, LevyModel};
use levy_besov::phase::{RegionKind, ScalingSettings};
use levy_besov::sampler::GridSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// A model given on the command line: either a family name
/// (`laplace`) or an inline table (`{ family = "sas", params = { alpha = 1.5 } }`).
pub fn parse_model(s: &str) -> Result<LevyModel, CliError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Wrap {
        model: LevyModel,
    }
    let t = s.trim();
    let doc = if t.starts_with('{') {
        format!("model = {t}")
    } else {
        format!("model = {{ family = {t:?} }}")
    };
    toml::from_str::<Wrap>(&doc)
        .map(|w| w.model)
        .map_err(|e| CliError::config(format!("invalid model {s:?}: {e}")))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| match v.trim() {
            "inf" | "infinity" => Ok(f64::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("not a number: {other:?}"))),
        })
        .collect()
}

pub fn require<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(format!("missing required setting `{key}`")))
}

/// Overwrite `dst` with `src` when the flag was given.
pub fn merge<T>(dst: &mut Option<T>, src: Option<T>) {
    if src.is_some() {
        *dst = src;
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub model: Option<LevyModel>,
    pub grid: Option<GridSpec>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Point-cloud CSV for compound-Poisson models.
    pub points: Option<PathBuf>,
    pub jump_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub input: Option<PathBuf>,
    pub basis: Option<usize>,
    pub levels: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub tau: Option<f64>,
    pub mu: Option<f64>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub pyramid: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicesConfig {
    pub model: Option<LevyModel>,
    pub decades: Option<usize>,
    pub samples_per_decade: Option<usize>,
    pub p_resolution: Option<f64>,
    pub convention: Option<IndexConvention>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMethodChoice {
    Cf,
    Mc,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunctionKind {
    /// 1 on every cell of the grid.
    #[default]
    Indicator,
    /// `exp(-|x|²)`.
    Gaussian,
    /// `(1 - |x|²)_+`.
    Bump,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub model: Option<LevyModel>,
    pub p: Option<f64>,
    pub method: Option<MomentMethodChoice>,
    pub draws: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<GridSpec>,
    pub test_function: Option<TestFunctionKind>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub model: Option<LevyModel>,
    pub d: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub tau_grid: Option<Vec<f64>>,
    pub kind: Option<RegionKind>,
    /// Known `[β0, β∞]`; estimated from the model otherwise.
    pub indices: Option<[f64; 2]>,
    pub settings: Option<ScalingSettings>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}
