//! Outlier filtering for labeled text datasets with per-class One-Class
//! Deep SVDD models.
//!
//! The workflow: embed each record, partition by label, pretrain an
//! autoencoder per class, train Deep SVDD from its encoder, score every
//! record by squared distance to the class center, min-max normalize the
//! scores within the class and keep records whose normalized score is at
//! most a threshold.

pub mod autoencoder;
pub mod classifiers;
pub mod cli;
pub mod config;
pub mod deep_svdd;
pub mod embeddings;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod pipeline;
pub mod synth;
pub mod workflow;

pub use error::{Error, Result};
