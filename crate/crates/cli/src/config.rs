//! Resolved run configuration: defaults, then a config file, then flags.

use std::path::Path;

use agp_core::corpus::{DEFAULT_RATIO, DEFAULT_THRESHOLD};
use agp_core::decode::DecodeConfig;
use agp_core::train::{LossConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSettings {
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestSettings {
    pub metadata_prefix: String,
    pub set_spec: Option<String>,
    pub delay_ms: u64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub timeout_s: u64,
    pub strict_resumption: bool,
    pub college_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub loss: LossConfig,
    pub decode: DecodeConfig,
    pub split: SplitSettings,
    pub harvest: HarvestSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            loss: LossConfig::default(),
            decode: DecodeConfig::default(),
            split: SplitSettings { ratio: DEFAULT_RATIO, seed: 42 },
            harvest: HarvestSettings {
                metadata_prefix: "dim".into(),
                set_spec: None,
                delay_ms: 1000,
                retries: 3,
                backoff_ms: 500,
                timeout_s: 60,
                strict_resumption: false,
                college_threshold: DEFAULT_THRESHOLD,
            },
        }
    }
}

/// Overlays `patch` onto `base`. Keys absent from `base` are errors so that
/// misspelled settings do not pass silently.
fn merge(base: &mut Value, patch: Value, path: &str) -> Result<(), CliError> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let key = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                let slot = b.get_mut(&k).ok_or_else(|| CliError::Config(format!("unknown setting `{key}`")))?;
                merge(slot, v, &key)?;
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with the file at `path` (`.toml` or `.json`).
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let patch: Value = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            let t: toml::Value =
                toml::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::to_value(t).map_err(|e| CliError::Config(e.to_string()))?
        };
        let mut base = serde_json::to_value(Self::default()).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut base, patch, "")?;
        serde_json::from_value(base).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// What gets written to a run directory.
#[derive(Debug, Serialize)]
pub struct ResolvedConfig<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub config_hash: String,
}

/// Hex SHA-256 of the canonical JSON of the command and its settings.
pub fn config_hash(command: &str, config: &RunConfig) -> String {
    let body = serde_json::to_string(&(command, config)).expect("config serializes");
    Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn resolved<'a>(command: &'a str, config: &'a RunConfig) -> ResolvedConfig<'a> {
    ResolvedConfig { command, config, config_hash: config_hash(command, config) }
}
