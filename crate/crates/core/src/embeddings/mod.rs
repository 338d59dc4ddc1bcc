//! Turning dataset records into fixed-dimension vectors.
//!
//! Three providers share one contract: output order matches input order
//! and every vector has the configured dimension.

mod hashing;
mod precomputed;
mod remote;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use hashing::{embed_hashing, hash_text, tokenize};
pub use precomputed::{embed_precomputed, read_embedding_file, write_embedding_file, EmbeddingEntry};
pub use remote::{embed_remote, EMBED_URL_ENV};

use crate::error::{Error, Result};
use crate::pipeline::DatasetRecord;

pub type EmbeddingVector = Vec<f64>;

pub const DEFAULT_DIM: usize = 384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    Precomputed,
    Hashing,
    Remote,
}

impl std::str::FromStr for EmbedderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "precomputed" => Ok(Self::Precomputed),
            "hashing" => Ok(Self::Hashing),
            "remote" => Ok(Self::Remote),
            other => Err(Error::Config(format!(
                "unknown embedder {other:?} (expected precomputed, hashing or remote)"
            ))),
        }
    }
}

impl std::fmt::Display for EmbedderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Precomputed => "precomputed",
            Self::Hashing => "hashing",
            Self::Remote => "remote",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    pub batch_size: usize,
    pub timeout_ms: u64,
    pub retries: u32,
    /// Delay before the first retry; doubles on each subsequent one.
    pub backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8080".into(),
            batch_size: 64,
            timeout_ms: 30_000,
            retries: 3,
            backoff_ms: 200,
            max_in_flight: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub kind: EmbedderKind,
    pub dim: usize,
    pub precomputed_path: Option<PathBuf>,
    /// Regex whose matches are tokens. `None` means lowercased maximal
    /// alphanumeric runs.
    pub token_pattern: Option<String>,
    pub hash_seed: u64,
    pub remote: RemoteConfig,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            kind: EmbedderKind::Hashing,
            dim: DEFAULT_DIM,
            precomputed_path: None,
            token_pattern: None,
            hash_seed: 0,
            remote: RemoteConfig::default(),
        }
    }
}

impl EmbeddingConfig {
    pub fn hashing(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn precomputed(path: impl Into<PathBuf>, dim: usize) -> Self {
        Self {
            kind: EmbedderKind::Precomputed,
            dim,
            precomputed_path: Some(path.into()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("embedding dim must be positive".into()));
        }
        match self.kind {
            EmbedderKind::Hashing if self.dim < 2 => {
                Err(Error::Config("hashing embedder needs dim >= 2".into()))
            }
            EmbedderKind::Precomputed if self.precomputed_path.is_none() => Err(Error::Config(
                "precomputed embedder needs an embedding file path".into(),
            )),
            EmbedderKind::Remote if self.remote.batch_size == 0 => {
                Err(Error::Config("remote batch size must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Embeds `records` with whichever provider `config` selects.
pub fn embed(config: &EmbeddingConfig, records: &[DatasetRecord]) -> Result<Vec<EmbeddingVector>> {
    config.validate()?;
    match config.kind {
        EmbedderKind::Precomputed => embed_precomputed(config, records),
        EmbedderKind::Hashing => embed_hashing(config, records),
        EmbedderKind::Remote => embed_remote(config, records),
    }
}

pub(crate) fn check_vector(v: &[f64], dim: usize, what: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::shape(what.to_string(), dim, v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data(format!("{what} contains non-finite values")));
    }
    Ok(())
}
