//! Per-class model fitting: every label gets its own autoencoder-pretrained
//! Deep SVDD model, trained only on that label's vectors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassPartition, DatasetRecord};
use crate::autoencoder::{pretrain, AutoencoderModel, PretrainConfig};
use crate::deep_svdd::{score, train_one_class, DeepSvddModel, ScoreSet, SvddConfig, DEFAULT_NU, DEFAULT_WEIGHT_DECAY};
use crate::error::{Error, Result};
use crate::numeric::SeededRng;

pub const MIN_CLASS_SIZE: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Encoder layer widths after the input, e.g. `[128, 32]`.
    pub hidden_dims: Vec<usize>,
    pub pretrain: PretrainConfig,
    pub svdd: SvddConfig,
    pub weight_decay: f64,
    pub nu: f64,
    pub min_class_size: usize,
    pub allow_small_classes: bool,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            hidden_dims: vec![128, 32],
            pretrain: PretrainConfig::default(),
            svdd: SvddConfig::default(),
            weight_decay: DEFAULT_WEIGHT_DECAY,
            nu: DEFAULT_NU,
            min_class_size: MIN_CLASS_SIZE,
            allow_small_classes: false,
            seed: 0,
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFit {
    pub label: u32,
    pub pretrain_trace: Vec<f64>,
    pub svdd_trace: Vec<f64>,
    pub model: DeepSvddModel,
    /// Scores of this class's training records, normalized within the class.
    pub scores: ScoreSet,
}

/// Fits one model per label. `embeddings` is aligned with `records`.
/// Results are ordered by label.
pub fn fit_per_class(records: &[DatasetRecord], embeddings: &[Vec<f64>], config: &FitConfig) -> Result<Vec<ClassFit>> {
    if records.len() != embeddings.len() {
        return Err(Error::shape("embeddings", records.len(), embeddings.len()));
    }
    if records.is_empty() {
        return Err(Error::contract("no training records"));
    }
    let partition = ClassPartition::from_records(records);
    if !config.allow_small_classes {
        for (&label, ids) in &partition.groups {
            if ids.len() < config.min_class_size {
                return Err(Error::SmallClass {
                    label,
                    count: ids.len(),
                    min: config.min_class_size,
                });
            }
        }
    }

    let mut by_label: BTreeMap<u32, (Vec<String>, Vec<Vec<f64>>)> = BTreeMap::new();
    for (r, v) in records.iter().zip(embeddings) {
        let e = by_label.entry(r.label).or_default();
        e.0.push(r.id.clone());
        e.1.push(v.clone());
    }

    let root = SeededRng::new(config.seed);
    let fits: Vec<ClassFit> = by_label
        .into_par_iter()
        .map(|(label, (ids, vectors))| {
            let mut rng = root.derive(u64::from(label));
            fit_class(label, ids, &vectors, config, &mut rng)
        })
        .collect::<Result<_>>()?;

    if let Some(dir) = &config.output_dir {
        super::persist::write_class_models(dir, &fits, config.seed)?;
    }
    Ok(fits)
}

fn fit_class(
    label: u32,
    ids: Vec<String>,
    vectors: &[Vec<f64>],
    config: &FitConfig,
    rng: &mut SeededRng,
) -> Result<ClassFit> {
    let dim = vectors[0].len();
    let mut dims = vec![dim];
    dims.extend(&config.hidden_dims);
    let ae = AutoencoderModel::new(&dims, rng)?;
    let (ae, pretrain_trace) =
        pretrain(ae, vectors, &config.pretrain, rng).map_err(|e| with_label(e, label))?;

    let mut model = DeepSvddModel::new(ae.into_encoder(), config.weight_decay, config.nu)?;
    model.initialize_center(vectors)?;
    let (model, svdd_trace) = train_one_class(model, vectors, &config.svdd, rng).map_err(|e| with_label(e, label))?;
    let scores = ScoreSet::new(ids, score(&model, vectors)?)?;
    Ok(ClassFit {
        label,
        pretrain_trace,
        svdd_trace,
        model,
        scores,
    })
}

fn with_label(e: Error, label: u32) -> Error {
    match e {
        Error::Training(m) => Error::Training(format!("class {label}: {m}")),
        other => other,
    }
}

/// Scores records with the model of their own label, normalizing within
/// each label. Returns `(label, scores)` pairs ordered by label.
pub fn score_by_class(
    fits: &[ClassFit],
    records: &[DatasetRecord],
    embeddings: &[Vec<f64>],
) -> Result<Vec<(u32, ScoreSet)>> {
    if records.len() != embeddings.len() {
        return Err(Error::shape("embeddings", records.len(), embeddings.len()));
    }
    let models: BTreeMap<u32, &DeepSvddModel> = fits.iter().map(|f| (f.label, &f.model)).collect();
    let mut grouped: BTreeMap<u32, (Vec<String>, Vec<Vec<f64>>)> = BTreeMap::new();
    for (r, v) in records.iter().zip(embeddings) {
        if !models.contains_key(&r.label) {
            return Err(Error::Data(format!(
                "record {:?} has label {} but no model was trained for it",
                r.id, r.label
            )));
        }
        let e = grouped.entry(r.label).or_default();
        e.0.push(r.id.clone());
        e.1.push(v.clone());
    }
    grouped
        .into_iter()
        .map(|(label, (ids, vectors))| {
            let raw = score(models[&label], &vectors)?;
            Ok((label, ScoreSet::new(ids, raw)?))
        })
        .collect()
}
