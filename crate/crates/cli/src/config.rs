//! Experiment configuration: one JSON document, env seed override, and
//! dotted-path `--set` overrides applied before deserialization.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use loewner_ito::herglotz::HerglotzSpec;
use loewner_ito::tau_driver::DriverConfig;

use crate::CliError;

/// Environment variable that overrides the config seed.
pub const SEED_ENV_VAR: &str = "LOEWNER_ITO_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_end: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Classical,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Euler,
    Heun,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    /// Polynomial coefficients c_0..c_m as [re, im] pairs.
    pub poly: Vec<[f64; 2]>,
    /// Evaluation point as [re, im].
    pub z: [f64; 2],
    pub h: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    /// Sample points; defaults to the corners of {0,1}^n.
    #[serde(default)]
    pub grid: Option<Vec<Vec<f64>>>,
    /// Defaults to 1e-10 analytic, 1e-4 finite-difference.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Classify through sampled finite differences instead of analytic
    /// derivatives.
    #[serde(default)]
    pub finite_difference: bool,
    #[serde(default)]
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub n_angles: Option<usize>,
}

fn default_n_paths() -> usize {
    1
}

/// The single JSON experiment document. Subcommands read the sections they
/// need and reject configs missing them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; defaults to 0 for reproducibility.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub herglotz: Option<HerglotzSpec>,
    #[serde(default)]
    pub driver: Option<DriverConfig>,
    #[serde(default)]
    pub kappa: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// Initial points as [re, im] pairs.
    #[serde(default)]
    pub initial_points: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub flow: Option<FlowKind>,
    #[serde(default)]
    pub scheme: Option<SchemeName>,
    #[serde(default)]
    pub refinement_levels: Option<usize>,
    #[serde(default)]
    pub generator: Option<GeneratorSection>,
    #[serde(default)]
    pub classify: Option<ClassifySection>,
    #[serde(default)]
    pub validate: Option<ValidateSection>,
}

/// Loads the config file, applies the seed environment variable and the
/// `--set` overrides (in that order; explicit flags win), and returns both
/// the typed config and the resolved JSON embedded into reports.
pub fn load(path: &Path, overrides: &[String]) -> Result<(ExperimentConfig, Value), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed config {}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Validation(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    }
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        let seed: u64 = raw.parse().map_err(|_| {
            CliError::Validation(format!("{SEED_ENV_VAR} must be a 64-bit integer, got '{raw}'"))
        })?;
        value["seed"] = Value::from(seed);
    }
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    let config: ExperimentConfig = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
    // Re-serialize so reports embed the fully resolved document, defaults
    // included.
    let resolved = serde_json::to_value(&config)
        .map_err(|e| CliError::Runtime(format!("cannot serialize config: {e}")))?;
    Ok((config, resolved))
}

/// Applies one `key.path=value` override; the value is parsed as JSON and
/// falls back to a plain string.
fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("--set expects KEY=VALUE, got '{spec}'"))
    })?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Validation(format!(
            "--set key '{path}' has empty segments"
        )));
    }
    let parsed: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (index, segment) in segments.iter().enumerate() {
        let map = cursor.as_object_mut().ok_or_else(|| {
            CliError::Validation(format!(
                "--set {path}: '{}' is not an object",
                segments[..index].join(".")
            ))
        })?;
        if index + 1 == segments.len() {
            map.insert((*segment).to_string(), parsed);
            return Ok(());
        }
        cursor = map
            .entry((*segment).to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("override path always has at least one segment")
}
