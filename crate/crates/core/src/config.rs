//! Run configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! data = corpus.jsonl
//! embedder = hashing
//! thresholds = 0.2, 0.4, 0.6
//! ```
//!
//! One assignment per line. Blank lines and lines starting with `#` are
//! ignored, keys are case-sensitive and later assignments win. List values
//! are comma separated. Command-line flags are applied as further
//! assignments after the file, so they take precedence over it.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierParams};
use crate::embeddings::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::pipeline::{validate_threshold, DatasetFormat, FitConfig, DEFAULT_TEST_FRACTION, DEFAULT_THRESHOLDS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    /// `None` infers the format from the file extension.
    pub format: Option<DatasetFormat>,
    pub embedding: EmbeddingConfig,
    pub fit: FitConfig,
    pub thresholds: Vec<f64>,
    pub classifiers: Vec<ClassifierKind>,
    pub classifier_params: ClassifierParams,
    pub test_fraction: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            format: None,
            embedding: EmbeddingConfig::default(),
            fit: FitConfig::default(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            classifier_params: ClassifierParams::default(),
            test_fraction: DEFAULT_TEST_FRACTION,
            seed: 0,
            out: None,
        }
    }
}

/// Every recognised key, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "data",
    "format",
    "embedder",
    "dim",
    "embeddings",
    "token_pattern",
    "hash_seed",
    "embed_url",
    "embed_batch",
    "embed_timeout_ms",
    "embed_retries",
    "embed_backoff_ms",
    "embed_max_in_flight",
    "hidden_dims",
    "epochs_ae",
    "epochs_svdd",
    "batch_ae",
    "batch_svdd",
    "lr",
    "lambda",
    "nu",
    "min_class_size",
    "allow_small_classes",
    "thresholds",
    "classifiers",
    "knn_k",
    "logreg_epochs",
    "logreg_lr",
    "lda_ridge",
    "tree_max_depth",
    "tree_min_leaf",
    "test_fraction",
    "seed",
    "out",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses a configuration file on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                let msg = match e {
                    Error::Config(m) => m,
                    other => other.to_string(),
                };
                Error::Config(format!("line {}: {msg}", i + 1))
            })?;
        }
        Ok(())
    }

    /// Assigns one key. An empty value resets optional keys to unset.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let emb = &mut self.embedding;
        let fit = &mut self.fit;
        let cls = &mut self.classifier_params;
        match key {
            "format_version" if value == "1" => {}
            "format_version" => return Err(Error::Config(format!("unsupported format_version {value}"))),
            "data" => self.data = (!value.is_empty()).then(|| value.into()),
            "format" => {
                self.format = match value {
                    "" | "auto" => None,
                    "jsonl" => Some(DatasetFormat::Jsonl),
                    "csv" => Some(DatasetFormat::Csv),
                    other => return Err(Error::Config(format!("unknown format {other:?}"))),
                }
            }
            "embedder" => emb.kind = value.parse()?,
            "dim" => emb.dim = num(key, value)?,
            "embeddings" => {
                emb.precomputed_path = (!value.is_empty()).then(|| value.into());
            }
            "token_pattern" => emb.token_pattern = (!value.is_empty()).then(|| value.to_string()),
            "hash_seed" => emb.hash_seed = num(key, value)?,
            "embed_url" => emb.remote.base_url = value.to_string(),
            "embed_batch" => emb.remote.batch_size = num(key, value)?,
            "embed_timeout_ms" => emb.remote.timeout_ms = num(key, value)?,
            "embed_retries" => emb.remote.retries = num(key, value)?,
            "embed_backoff_ms" => emb.remote.backoff_ms = num(key, value)?,
            "embed_max_in_flight" => emb.remote.max_in_flight = num(key, value)?,
            "hidden_dims" => fit.hidden_dims = list(key, value)?,
            "epochs_ae" => fit.pretrain.epochs = num(key, value)?,
            "epochs_svdd" => fit.svdd.epochs = num(key, value)?,
            "batch_ae" => fit.pretrain.batch_size = num(key, value)?,
            "batch_svdd" => fit.svdd.batch_size = num(key, value)?,
            "lr" => {
                let lr = num(key, value)?;
                fit.pretrain.adam.learning_rate = lr;
                fit.svdd.adam.learning_rate = lr;
            }
            "lambda" => fit.weight_decay = num(key, value)?,
            "nu" => fit.nu = num(key, value)?,
            "min_class_size" => fit.min_class_size = num(key, value)?,
            "allow_small_classes" => fit.allow_small_classes = boolean(key, value)?,
            "threshold" => self.thresholds = vec![num(key, value)?],
            "thresholds" => self.thresholds = list(key, value)?,
            "classifiers" => self.classifiers = list(key, value)?,
            "knn_k" => cls.knn_k = num(key, value)?,
            "logreg_epochs" => cls.logreg_epochs = num(key, value)?,
            "logreg_lr" => cls.logreg_lr = num(key, value)?,
            "lda_ridge" => cls.lda_ridge = if value.is_empty() { None } else { Some(num(key, value)?) },
            "tree_max_depth" => cls.tree_max_depth = num(key, value)?,
            "tree_min_leaf" => cls.tree_min_leaf = num(key, value)?,
            "test_fraction" => self.test_fraction = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = (!value.is_empty()).then(|| value.into()),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.embedding.validate()?;
        if self.thresholds.is_empty() {
            return Err(Error::Config("at least one threshold is required".into()));
        }
        for &t in &self.thresholds {
            validate_threshold(t).map_err(|_| Error::Config(format!("threshold {t} is outside [0, 1]")))?;
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("at least one classifier is required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        let fit = &self.fit;
        if fit.hidden_dims.is_empty() || fit.hidden_dims.contains(&0) {
            return Err(Error::Config("hidden_dims must be a non-empty list of positive widths".into()));
        }
        if fit.pretrain.batch_size == 0 || fit.svdd.batch_size == 0 {
            return Err(Error::Config("batch sizes must be positive".into()));
        }
        let lr = fit.pretrain.adam.learning_rate;
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("lr must be positive, got {lr}")));
        }
        if !(fit.weight_decay >= 0.0 && fit.weight_decay.is_finite()) {
            return Err(Error::Config(format!("lambda must be non-negative, got {}", fit.weight_decay)));
        }
        if !(fit.nu > 0.0 && fit.nu <= 1.0) {
            return Err(Error::Config(format!("nu must lie in (0, 1], got {}", fit.nu)));
        }
        if self.classifier_params.knn_k == 0 {
            return Err(Error::Config("knn_k must be at least 1".into()));
        }
        if self.classifier_params.tree_max_depth == 0 {
            return Err(Error::Config("tree_max_depth must be at least 1".into()));
        }
        Ok(())
    }

    /// Fitting configuration with the run seed and output directory filled in.
    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            seed: self.seed,
            output_dir: self.out.clone(),
            ..self.fit.clone()
        }
    }

    /// Serializes every key in [`KEYS`] order. `from_text(to_text())`
    /// reproduces the configuration.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let emb = &self.embedding;
        let fit = &self.fit;
        let cls = &self.classifier_params;
        let value = |key: &str| -> String {
            match key {
                "data" => path(&self.data),
                "format" => self.format.map(|f| f.to_string()).unwrap_or_else(|| "auto".into()),
                "embedder" => emb.kind.to_string(),
                "dim" => emb.dim.to_string(),
                "embeddings" => path(&emb.precomputed_path),
                "token_pattern" => emb.token_pattern.clone().unwrap_or_default(),
                "hash_seed" => emb.hash_seed.to_string(),
                "embed_url" => emb.remote.base_url.clone(),
                "embed_batch" => emb.remote.batch_size.to_string(),
                "embed_timeout_ms" => emb.remote.timeout_ms.to_string(),
                "embed_retries" => emb.remote.retries.to_string(),
                "embed_backoff_ms" => emb.remote.backoff_ms.to_string(),
                "embed_max_in_flight" => emb.remote.max_in_flight.to_string(),
                "hidden_dims" => join(&fit.hidden_dims),
                "epochs_ae" => fit.pretrain.epochs.to_string(),
                "epochs_svdd" => fit.svdd.epochs.to_string(),
                "batch_ae" => fit.pretrain.batch_size.to_string(),
                "batch_svdd" => fit.svdd.batch_size.to_string(),
                "lr" => fit.pretrain.adam.learning_rate.to_string(),
                "lambda" => fit.weight_decay.to_string(),
                "nu" => fit.nu.to_string(),
                "min_class_size" => fit.min_class_size.to_string(),
                "allow_small_classes" => fit.allow_small_classes.to_string(),
                "thresholds" => join(&self.thresholds),
                "classifiers" => join(&self.classifiers),
                "knn_k" => cls.knn_k.to_string(),
                "logreg_epochs" => cls.logreg_epochs.to_string(),
                "logreg_lr" => cls.logreg_lr.to_string(),
                "lda_ridge" => cls.lda_ridge.map(|r| r.to_string()).unwrap_or_default(),
                "tree_max_depth" => cls.tree_max_depth.to_string(),
                "tree_min_leaf" => cls.tree_min_leaf.to_string(),
                "test_fraction" => self.test_fraction.to_string(),
                "seed" => self.seed.to_string(),
                "out" => path(&self.out),
                _ => unreachable!("every key in KEYS is handled"),
            }
        };
        let mut text = String::from("# svdd-clean resolved configuration\nformat_version = 1\n");
        for key in KEYS {
            text.push_str(&format!("{key} = {}\n", value(key)));
        }
        text
    }
}
