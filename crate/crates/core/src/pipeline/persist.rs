//! Run directory layout.
//!
//! ```text
//! <run>/config.txt               resolved configuration
//! <run>/manifest.json            dataset, split and label summary
//! <run>/embeddings.jsonl         {"id","vector"} for every record
//! <run>/models/class_<label>.json
//! <run>/scores_train.jsonl       {"format_version","id","label","raw","normalized"}
//! <run>/scores_test.jsonl
//! <run>/report_<τ>.json          one FilterReport per threshold
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::filter::FORMAT_VERSION;
use super::{ClassFit, FilterReport, TrainTestSplit};
use crate::deep_svdd::{DeepSvddModel, ScoreSet};
use crate::error::{Error, Result};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(None, format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.txt")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn embeddings(&self) -> PathBuf {
        self.root.join("embeddings.jsonl")
    }

    pub fn model(&self, label: u32) -> PathBuf {
        self.root.join("models").join(format!("class_{label}.json"))
    }

    pub fn train_scores(&self) -> PathBuf {
        self.root.join("scores_train.jsonl")
    }

    pub fn test_scores(&self) -> PathBuf {
        self.root.join("scores_test.jsonl")
    }

    pub fn report(&self, threshold: f64) -> PathBuf {
        self.root.join(FilterReport::file_name(threshold))
    }

    pub fn eval_json(&self) -> PathBuf {
        self.root.join("eval.json")
    }

    pub fn eval_accuracy_csv(&self) -> PathBuf {
        self.root.join("eval_accuracy.csv")
    }

    pub fn eval_inlier_outlier_csv(&self) -> PathBuf {
        self.root.join("eval_inlier_outlier.csv")
    }

    /// Thresholds of every `report_*.json` present, ascending.
    pub fn report_thresholds(&self) -> Result<Vec<f64>> {
        let entries = std::fs::read_dir(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.root, e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Some(t) = name
                .strip_prefix("report_")
                .and_then(|s| s.strip_suffix(".json"))
                .and_then(|s| s.parse::<f64>().ok())
            {
                out.push(t);
            }
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dataset: String,
    pub format: String,
    pub n_records: usize,
    /// Record count per label.
    pub labels: BTreeMap<u32, usize>,
    pub split: TrainTestSplit,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub label: u32,
    pub seed: u64,
    pub pretrain_trace: Vec<f64>,
    pub svdd_trace: Vec<f64>,
    pub model: DeepSvddModel,
}

pub fn write_class_models(dir: &Path, fits: &[ClassFit], seed: u64) -> Result<Vec<PathBuf>> {
    let run = RunDir::new(dir);
    fits.iter()
        .map(|f| {
            let path = run.model(f.label);
            write_json(
                &path,
                &ModelFile {
                    format_version: FORMAT_VERSION,
                    label: f.label,
                    seed,
                    pretrain_trace: f.pretrain_trace.clone(),
                    svdd_trace: f.svdd_trace.clone(),
                    model: f.model.clone(),
                },
            )?;
            Ok(path)
        })
        .collect()
}

/// Reads a model file, checking its version and layer shapes.
pub fn read_class_model(path: &Path) -> Result<ModelFile> {
    let mut file: ModelFile = read_json(path)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::parse(
            None,
            format!("{}: unsupported format_version {}", path.display(), file.format_version),
        ));
    }
    file.model.encoder = crate::numeric::DenseNet::new(file.model.encoder.layers().to_vec())?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLine {
    pub format_version: u32,
    pub id: String,
    pub label: u32,
    pub raw: f64,
    pub normalized: f64,
}

pub fn write_scores(path: &Path, sets: &[(u32, ScoreSet)]) -> Result<()> {
    let mut buf = Vec::new();
    for (label, set) in sets {
        for i in 0..set.len() {
            serde_json::to_writer(
                &mut buf,
                &ScoreLine {
                    format_version: FORMAT_VERSION,
                    id: set.ids[i].clone(),
                    label: *label,
                    raw: set.raw[i],
                    normalized: set.normalized[i],
                },
            )?;
            buf.push(b'\n');
        }
    }
    write_atomic(path, &buf)
}

/// Reads a score file back into per-label sets, preserving the persisted
/// normalized values.
pub fn read_scores(path: &Path) -> Result<Vec<(u32, ScoreSet)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut grouped: BTreeMap<u32, ScoreSet> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: ScoreLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse(Some(i + 1), format!("{}: {e}", path.display())))?;
        if s.format_version != FORMAT_VERSION {
            return Err(Error::parse(
                Some(i + 1),
                format!("unsupported format_version {}", s.format_version),
            ));
        }
        let set = grouped.entry(s.label).or_insert_with(|| ScoreSet {
            ids: Vec::new(),
            raw: Vec::new(),
            normalized: Vec::new(),
        });
        set.ids.push(s.id);
        set.raw.push(s.raw);
        set.normalized.push(s.normalized);
    }
    Ok(grouped.into_iter().collect())
}
