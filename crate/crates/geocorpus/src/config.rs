//! Pipeline configuration file (TOML).
//!
//! ```toml
//! [input]
//! corpus = "corpus.jsonl"
//!
//! [lid]
//! train = "train.tsv"      # or: model = "model.glid"
//! feature_dim = 4096
//!
//! [geo]
//! cities = "cities.csv"
//!
//! [audit]
//! baselines = "baselines.csv"
//! census = "census.csv"
//!
//! [report]
//! output_dir = "out"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use geocorpus_core::aggregate::{LanguageThreshold, DEFAULT_MIN_WORDS};
use geocorpus_core::baselines::DEFAULT_INVENTORY_THRESHOLD;
use geocorpus_core::geo::DEFAULT_RADIUS_KM;
use geocorpus_core::ModelConfig;
use serde::{Deserialize, Serialize};

use crate::report::{Format, ReportOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputSection,
    pub lid: LidSection,
    pub geo: GeoSection,
    #[serde(default)]
    pub aggregate: AggregateSection,
    #[serde(default)]
    pub audit: AuditSection,
    pub report: ReportSection,
    /// Execution settings; not echoed into the manifest, since outputs do
    /// not depend on them.
    #[serde(default, skip_serializing)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub corpus: PathBuf,
}

/// Either a saved model or training data plus hyperparameters. Unset
/// hyperparameters take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LidSection {
    pub model: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub feature_dim: Option<u32>,
    pub hidden_dim: Option<u32>,
    pub min_chars: Option<u32>,
    pub seed: Option<u64>,
    pub epochs: Option<u32>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<u32>,
    /// Save a trained model into the output directory.
    #[serde(default)]
    pub save_model: bool,
}

impl LidSection {
    pub fn model_config(&self) -> ModelConfig {
        let d = ModelConfig::default();
        ModelConfig {
            feature_dim: self.feature_dim.unwrap_or(d.feature_dim),
            hidden_dim: self.hidden_dim.unwrap_or(d.hidden_dim),
            min_chars: self.min_chars.unwrap_or(d.min_chars),
            seed: self.seed.unwrap_or(d.seed),
            epochs: self.epochs.unwrap_or(d.epochs),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoSection {
    pub cities: Option<PathBuf>,
    /// `tld,iso3`; defaults to the built-in ISO ccTLD table.
    pub tld: Option<PathBuf>,
    pub excluded: Option<PathBuf>,
    #[serde(default = "default_radius")]
    pub radius_km: f64,
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS_KM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateSection {
    /// Languages below this many words are left out of the global table.
    pub min_words: Option<u64>,
    /// Alternative rule: keep languages holding this share of some country.
    pub country_share: Option<f64>,
}

impl Default for AggregateSection {
    fn default() -> Self {
        AggregateSection {
            min_words: Some(DEFAULT_MIN_WORDS),
            country_share: None,
        }
    }
}

impl AggregateSection {
    pub fn threshold(&self) -> Result<LanguageThreshold, String> {
        match (self.min_words, self.country_share) {
            (Some(_), Some(_)) => Err("set only one of min_words and country_share".into()),
            (None, Some(f)) => Ok(LanguageThreshold::CountryShare(f)),
            (Some(n), None) => Ok(LanguageThreshold::MinWords(n)),
            (None, None) => Ok(LanguageThreshold::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditStage {
    Correlate,
    Represent,
    Inventory,
}

impl AuditStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditStage::Correlate => "correlate",
            AuditStage::Represent => "represent",
            AuditStage::Inventory => "inventory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default = "all_stages")]
    pub stages: Vec<AuditStage>,
    pub baselines: Option<PathBuf>,
    pub census: Option<PathBuf>,
    #[serde(default = "default_inventory_threshold")]
    pub inventory_threshold: f64,
}

fn all_stages() -> Vec<AuditStage> {
    vec![
        AuditStage::Correlate,
        AuditStage::Represent,
        AuditStage::Inventory,
    ]
}

fn default_inventory_threshold() -> f64 {
    DEFAULT_INVENTORY_THRESHOLD
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            stages: all_stages(),
            baselines: None,
            census: None,
            inventory_threshold: DEFAULT_INVENTORY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub output_dir: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_cap")]
    pub svg_cap: f64,
}

fn all_formats() -> Vec<Format> {
    ReportOptions::default().formats.into_iter().collect()
}

fn default_top_k() -> usize {
    crate::report::DEFAULT_TOP_K
}

fn default_cap() -> f64 {
    crate::report::DEFAULT_SVG_CAP
}

impl ReportSection {
    pub fn options(&self) -> ReportOptions {
        ReportOptions {
            formats: self.formats.iter().copied().collect(),
            top_k: self.top_k,
            svg_cap: self.svg_cap,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Worker threads; `GEOCORPUS_THREADS` overrides it.
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing {path}: {message}")]
    Parse { path: String, message: String },
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Loads a config file. Paths inside stay as written; use
    /// [`PipelineConfig::resolve`] to read them.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Joins relative paths onto `base`.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
