//! Synthetic labeled datasets with known injected outliers.
//!
//! Each class is an isotropic Gaussian around its own center. A fraction of
//! every class is then corrupted, either by relabeling (`LabelFlip`, the
//! point stays in its true cluster) or by displacement (`FarPoint`, the
//! point moves 20 standard deviations in a random direction).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::{write_embedding_file, EmbeddingEntry};
use crate::error::{Error, Result};
use crate::numeric::{sq_dist, SeededRng};
use crate::pipeline::{write_atomic, write_dataset_jsonl, DatasetRecord};

/// Minimum center separation, in cluster standard deviations.
pub const CENTER_SEPARATION: f64 = 10.0;
/// Displacement of a far point, in cluster standard deviations.
pub const FAR_SHIFT: f64 = 20.0;

const WORDS_PER_CLASS: usize = 40;
const TOKENS_PER_TEXT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierMode {
    LabelFlip,
    FarPoint,
}

impl std::str::FromStr for OutlierMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label_flip" => Ok(Self::LabelFlip),
            "far_point" => Ok(Self::FarPoint),
            other => Err(Error::Config(format!(
                "unknown outlier mode {other:?} (expected label_flip or far_point)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub n_per_class: usize,
    pub dim: usize,
    pub cluster_std: f64,
    pub outlier_fraction: f64,
    pub outlier_mode: OutlierMode,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_classes: 2,
            n_per_class: 600,
            dim: 32,
            cluster_std: 1.0,
            outlier_fraction: 0.05,
            outlier_mode: OutlierMode::FarPoint,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub record: DatasetRecord,
    pub vector: Vec<f64>,
    /// Label of the cluster the point was drawn from.
    pub true_label: u32,
    pub is_injected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDataset {
    pub spec: SynthSpec,
    pub centers: Vec<Vec<f64>>,
    pub records: Vec<SynthRecord>,
}

impl SynthDataset {
    pub fn dataset_records(&self) -> Vec<DatasetRecord> {
        self.records.iter().map(|r| r.record.clone()).collect()
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.vector.clone()).collect()
    }

    pub fn injected_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_injected).count()
    }

    /// Writes `dataset.jsonl`, `truth.jsonl` and `embeddings.jsonl` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_dataset_jsonl(&dir.join("dataset.jsonl"), &self.dataset_records())?;
        let mut truth = Vec::new();
        for r in &self.records {
            serde_json::to_writer(
                &mut truth,
                &serde_json::json!({"id": r.record.id, "is_injected": r.is_injected}),
            )?;
            truth.push(b'\n');
        }
        write_atomic(&dir.join("truth.jsonl"), &truth)?;
        let entries: Vec<EmbeddingEntry> = self
            .records
            .iter()
            .map(|r| EmbeddingEntry {
                id: r.record.id.clone(),
                vector: r.vector.clone(),
            })
            .collect();
        write_embedding_file(&dir.join("embeddings.jsonl"), &entries)
    }
}

fn class_centers(spec: &SynthSpec, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let side = CENTER_SEPARATION * spec.cluster_std;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.n_classes);
    // axis-aligned centers are exactly side·√2 apart
    for k in 0..spec.n_classes.min(spec.dim) {
        let mut c = vec![0.0; spec.dim];
        c[k] = side;
        centers.push(c);
    }
    let spread = side * (spec.n_classes as f64).sqrt() * 2.0;
    while centers.len() < spec.n_classes {
        let cand: Vec<f64> = rng.unit_vector(spec.dim).into_iter().map(|x| x * spread * (1.0 + rng.next_f64())).collect();
        if centers.iter().all(|c| sq_dist(c, &cand).sqrt() >= side) {
            centers.push(cand);
        }
    }
    centers
}

fn token_soup(words_from: u32, rng: &mut SeededRng, noise: bool) -> String {
    (0..TOKENS_PER_TEXT)
        .map(|_| {
            let w = rng.below(WORDS_PER_CLASS);
            if noise {
                format!("noise{w}")
            } else {
                format!("c{words_from}w{w}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn generate(spec: &SynthSpec) -> Result<SynthDataset> {
    if spec.n_per_class < 10 {
        return Err(Error::contract("n_per_class must be at least 10"));
    }
    if spec.dim < 2 {
        return Err(Error::contract("dim must be at least 2"));
    }
    if spec.n_classes < 1 {
        return Err(Error::contract("need at least one class"));
    }
    if !(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 0.5) {
        return Err(Error::contract(format!(
            "outlier fraction must lie in [0, 0.5), got {}",
            spec.outlier_fraction
        )));
    }
    if !(spec.cluster_std > 0.0 && spec.cluster_std.is_finite()) {
        return Err(Error::contract("cluster_std must be positive"));
    }
    if spec.outlier_mode == OutlierMode::LabelFlip && spec.n_classes < 2 && spec.outlier_fraction > 0.0 {
        return Err(Error::contract("label flipping needs at least two classes"));
    }

    let mut rng = SeededRng::new(spec.seed);
    let centers = class_centers(spec, &mut rng);
    let n_injected = (spec.outlier_fraction * spec.n_per_class as f64).floor() as usize;
    let mut records = Vec::with_capacity(spec.n_classes * spec.n_per_class);

    for (k, center) in centers.iter().enumerate() {
        let mut chosen: Vec<usize> = (0..spec.n_per_class).collect();
        rng.shuffle(&mut chosen);
        let mut injected = vec![false; spec.n_per_class];
        for &i in &chosen[..n_injected] {
            injected[i] = true;
        }
        for (i, &inj) in injected.iter().enumerate() {
            let true_label = k as u32;
            let mut vector: Vec<f64> = center.iter().map(|c| c + spec.cluster_std * rng.normal()).collect();
            let mut label = true_label;
            let mut text = token_soup(true_label, &mut rng, false);
            if inj {
                match spec.outlier_mode {
                    OutlierMode::LabelFlip => {
                        let other = rng.below(spec.n_classes - 1);
                        label = if other >= k { other + 1 } else { other } as u32;
                    }
                    OutlierMode::FarPoint => {
                        let dir = rng.unit_vector(spec.dim);
                        vector.iter_mut().zip(&dir).for_each(|(v, d)| *v += FAR_SHIFT * spec.cluster_std * d);
                        text = token_soup(true_label, &mut rng, true);
                    }
                }
            }
            records.push(SynthRecord {
                record: DatasetRecord {
                    id: format!("{}", k * spec.n_per_class + i),
                    text,
                    label,
                },
                vector,
                true_label,
                is_injected: inj,
            });
        }
    }
    Ok(SynthDataset {
        spec: spec.clone(),
        centers,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_noise_means_no_flags() {
        let d = generate(&SynthSpec {
            outlier_fraction: 0.0,
            n_per_class: 20,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(d.injected_count(), 0);
        assert!(d.records.iter().all(|r| r.record.label == r.true_label));
    }

    #[test]
    fn injection_count_rounds_down_per_class() {
        let d = generate(&SynthSpec::default()).unwrap();
        for k in 0..2u32 {
            let n = d.records.iter().filter(|r| r.true_label == k && r.is_injected).count();
            assert_eq!(n, 30);
        }
        let d = generate(&SynthSpec {
            n_per_class: 19,
            outlier_fraction: 0.1,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(d.injected_count(), 2);
    }

    #[test]
    fn same_seed_same_dataset() {
        let s = SynthSpec {
            n_per_class: 30,
            ..SynthSpec::default()
        };
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = generate(&SynthSpec { seed: 1, ..s.clone() }).unwrap();
        assert_ne!(generate(&s).unwrap().records, other.records);
    }

    #[test]
    fn centers_are_separated() {
        let s = SynthSpec {
            n_classes: 6,
            dim: 3,
            n_per_class: 10,
            cluster_std: 2.0,
            ..SynthSpec::default()
        };
        let d = generate(&s).unwrap();
        for i in 0..6 {
            for j in i + 1..6 {
                assert!(sq_dist(&d.centers[i], &d.centers[j]).sqrt() >= 20.0);
            }
        }
    }

    #[test]
    fn label_flip_keeps_geometry_of_true_class() {
        let d = generate(&SynthSpec {
            outlier_mode: OutlierMode::LabelFlip,
            outlier_fraction: 0.1,
            n_per_class: 100,
            ..SynthSpec::default()
        })
        .unwrap();
        for r in d.records.iter().filter(|r| r.is_injected) {
            assert_ne!(r.record.label, r.true_label);
            let own = sq_dist(&r.vector, &d.centers[r.true_label as usize]);
            let claimed = sq_dist(&r.vector, &d.centers[r.record.label as usize]);
            assert!(own < claimed);
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        for bad in [
            SynthSpec { outlier_fraction: 0.5, ..SynthSpec::default() },
            SynthSpec { outlier_fraction: -0.1, ..SynthSpec::default() },
            SynthSpec { n_per_class: 9, ..SynthSpec::default() },
            SynthSpec { dim: 1, ..SynthSpec::default() },
        ] {
            assert!(generate(&bad).is_err());
        }
    }
}
