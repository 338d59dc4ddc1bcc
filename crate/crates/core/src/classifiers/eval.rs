use serde::{Deserialize, Serialize};

use super::TrainedClassifier;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Accuracy over the whole test set.
    pub accuracy: f64,
    pub accuracy_inlier: f64,
    /// Reported as 0 when there are no outliers.
    pub accuracy_outlier: f64,
    pub n_inlier: usize,
    pub n_outlier: usize,
    pub weighted: f64,
}

/// Count-weighted mean of inlier and outlier accuracy.
pub fn weighted_accuracy(acc_in: f64, acc_out: f64, n_in: usize, n_out: usize) -> Result<f64> {
    if n_in + n_out == 0 {
        return Err(Error::contract("weighted accuracy of zero samples"));
    }
    for a in [acc_in, acc_out] {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::contract(format!("accuracy must lie in [0, 1], got {a}")));
        }
    }
    let (ni, no) = (n_in as f64, n_out as f64);
    Ok((ni * acc_in + no * acc_out) / (ni + no))
}

pub fn accuracy(predicted: &[u32], truth: &[u32]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    predicted.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
}

/// Splits the test set into inliers (`normalized <= threshold`) and outliers
/// and scores the classifier on each part.
pub fn evaluate_split(
    classifier: &TrainedClassifier,
    vectors: &[Vec<f64>],
    labels: &[u32],
    normalized_scores: &[f64],
    threshold: f64,
) -> Result<EvalResult> {
    if vectors.is_empty() {
        return Err(Error::contract("empty test set"));
    }
    if vectors.len() != labels.len() || vectors.len() != normalized_scores.len() {
        return Err(Error::contract("test vectors, labels and scores must align"));
    }
    let predicted = classifier.predict(vectors);
    let (mut hit_in, mut n_in, mut hit_out, mut n_out) = (0usize, 0usize, 0usize, 0usize);
    for ((p, t), s) in predicted.iter().zip(labels).zip(normalized_scores) {
        let hit = usize::from(p == t);
        if *s <= threshold {
            n_in += 1;
            hit_in += hit;
        } else {
            n_out += 1;
            hit_out += hit;
        }
    }
    let frac = |h: usize, n: usize| if n == 0 { 0.0 } else { h as f64 / n as f64 };
    let (acc_in, acc_out) = (frac(hit_in, n_in), frac(hit_out, n_out));
    Ok(EvalResult {
        accuracy: accuracy(&predicted, labels),
        accuracy_inlier: acc_in,
        accuracy_outlier: acc_out,
        n_inlier: n_in,
        n_outlier: n_out,
        weighted: weighted_accuracy(acc_in, acc_out, n_in, n_out)?,
    })
}
