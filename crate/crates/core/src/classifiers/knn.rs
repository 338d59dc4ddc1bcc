use serde::{Deserialize, Serialize};

use super::{check_training, majority};
use crate::error::{Error, Result};
use crate::numeric::sq_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    points: Vec<Vec<f64>>,
    labels: Vec<u32>,
}

/// Stores the training set. Neighbors are ordered by Euclidean distance,
/// then training index; the vote goes to the most frequent label, then the
/// smallest label.
pub fn fit_knn(vectors: &[Vec<f64>], labels: &[u32], k: usize) -> Result<Knn> {
    check_training(vectors, labels)?;
    if k == 0 || k > vectors.len() {
        return Err(Error::contract(format!(
            "k must lie in [1, {}], got {k}",
            vectors.len()
        )));
    }
    Ok(Knn {
        k,
        points: vectors.to_vec(),
        labels: labels.to_vec(),
    })
}

impl Knn {
    pub fn predict_one(&self, x: &[f64]) -> u32 {
        let mut d: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (sq_dist(p, x), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        majority(d.iter().map(|&(_, i)| self.labels[i]))
    }
}
