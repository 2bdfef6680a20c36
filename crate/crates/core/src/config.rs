//! Run configuration: command-line values layered over an optional TOML file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::DEFAULT_MIN_TOKENS;
use crate::features::{FeatureConfig, FeatureKind};
use crate::textgrid::{DEFAULT_PHONE_TIER, DEFAULT_SILENCE_LABELS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub manifest_path: PathBuf,
    /// Synthetic systems to analyse; empty means every system in the manifest.
    pub systems: Vec<String>,
    pub features: Vec<FeatureKind>,
    pub phones_tier: String,
    /// Interval labels treated as silence or filler, compared case-insensitively.
    pub silence_labels: Vec<String>,
    pub subset_n: Option<usize>,
    pub seed: u64,
    pub test_fraction: f64,
    pub min_tokens: usize,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub feature_config: FeatureConfig,
}

impl RunConfig {
    pub fn new(manifest_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest_path: manifest_path.into(),
            systems: Vec::new(),
            features: vec![FeatureKind::LogSpec, FeatureKind::Lfcc],
            phones_tier: DEFAULT_PHONE_TIER.to_string(),
            silence_labels: DEFAULT_SILENCE_LABELS.iter().map(|s| s.to_string()).collect(),
            subset_n: None,
            seed: DEFAULT_SEED,
            test_fraction: DEFAULT_TEST_FRACTION,
            min_tokens: DEFAULT_MIN_TOKENS,
            out_dir: out_dir.into(),
            workers: default_workers(),
            feature_config: FeatureConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(ConfigError::Invalid("at least one feature is required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 0.5) {
            return Err(ConfigError::Invalid(format!(
                "test_fraction must lie in (0, 0.5), got {}",
                self.test_fraction
            )));
        }
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.min_tokens < 2 {
            return Err(ConfigError::Invalid("min_tokens must be at least 2".into()));
        }
        if self.phones_tier.is_empty() {
            return Err(ConfigError::Invalid("phone tier name is empty".into()));
        }
        self.feature_config
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Every field optional; anything set here is overridden by a flag.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub manifest: Option<PathBuf>,
    pub systems: Option<Vec<String>>,
    pub features: Option<Vec<FeatureKind>>,
    pub tier: Option<String>,
    pub silence: Option<Vec<String>>,
    pub subset_n: Option<usize>,
    pub seed: Option<u64>,
    pub test_fraction: Option<f64>,
    pub min_tokens: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub feature_config: Option<FeatureConfig>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.message().to_string(),
        })
    }

    /// Relative paths inside the file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut file = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.manifest, &mut file.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }
}

/// Values given on the command line. `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub manifest: Option<PathBuf>,
    pub systems: Option<Vec<String>>,
    pub features: Option<Vec<FeatureKind>>,
    pub tier: Option<String>,
    pub silence: Option<Vec<String>>,
    pub subset_n: Option<usize>,
    pub seed: Option<u64>,
    pub test_fraction: Option<f64>,
    pub min_tokens: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Defaults, then the file, then flags.
pub fn resolve(file: Option<ConfigFile>, flags: Overrides) -> Result<RunConfig> {
    let file = file.unwrap_or_default();
    let manifest = flags
        .manifest
        .or(file.manifest)
        .ok_or_else(|| ConfigError::Invalid("no manifest given (--manifest or config file)".into()))?;
    let out = flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("phonostat-out"));
    let mut config = RunConfig::new(manifest, out);
    if let Some(v) = flags.systems.or(file.systems) {
        config.systems = v;
    }
    if let Some(v) = flags.features.or(file.features) {
        config.features = v;
    }
    if let Some(v) = flags.tier.or(file.tier) {
        config.phones_tier = v;
    }
    if let Some(v) = flags.silence.or(file.silence) {
        config.silence_labels = v;
    }
    config.subset_n = flags.subset_n.or(file.subset_n);
    if let Some(v) = flags.seed.or(file.seed) {
        config.seed = v;
    }
    if let Some(v) = flags.test_fraction.or(file.test_fraction) {
        config.test_fraction = v;
    }
    if let Some(v) = flags.min_tokens.or(file.min_tokens) {
        config.min_tokens = v;
    }
    if let Some(v) = flags.workers.or(file.workers) {
        config.workers = v;
    }
    if let Some(v) = file.feature_config {
        config.feature_config = v;
    }
    config.features.dedup();
    config.validate()?;
    Ok(config)
}
