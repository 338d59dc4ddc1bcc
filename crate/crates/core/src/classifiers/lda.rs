use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{argmax_label, check_training, class_index};
use crate::error::{Error, Result};

/// Gaussian discriminant with a covariance shared by all classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lda {
    pub classes: Vec<u32>,
    pub means: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// `Σ⁻¹ μ_k` per class.
    coef: Vec<Vec<f64>>,
    /// `-½ μ_kᵀ Σ⁻¹ μ_k + ln π_k` per class.
    intercept: Vec<f64>,
}

/// `ridge = None` uses `1e-6 · trace(Σ) / dim`.
pub fn fit_lda(vectors: &[Vec<f64>], labels: &[u32], ridge: Option<f64>) -> Result<Lda> {
    check_training(vectors, labels)?;
    let (classes, y) = class_index(labels);
    if classes.len() < 2 {
        return Err(Error::contract("LDA needs at least two classes"));
    }
    let dim = vectors[0].len();
    let k = classes.len();
    let n = vectors.len();

    let mut means = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in vectors.iter().zip(&y) {
        counts[c] += 1;
        means[c].iter_mut().zip(x).for_each(|(m, xi)| *m += xi);
    }
    for (m, &cnt) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= cnt as f64);
    }

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for (x, &c) in vectors.iter().zip(&y) {
        let d = DVector::from_iterator(dim, x.iter().zip(&means[c]).map(|(a, b)| a - b));
        cov.ger(1.0, &d, &d, 1.0);
    }
    let denom = if n > k { (n - k) as f64 } else { 1.0 };
    cov /= denom;

    let ridge = ridge.unwrap_or_else(|| 1e-6 * cov.trace() / dim as f64);
    for i in 0..dim {
        cov[(i, i)] += ridge;
    }
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Numeric("pooled covariance is singular even after ridge".into()))?;

    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let mut coef = Vec::with_capacity(k);
    let mut intercept = Vec::with_capacity(k);
    for (m, p) in means.iter().zip(&priors) {
        let mu = DVector::from_column_slice(m);
        let a = chol.solve(&mu);
        intercept.push(-0.5 * mu.dot(&a) + p.ln());
        coef.push(a.iter().copied().collect());
    }
    Ok(Lda {
        classes,
        means,
        priors,
        coef,
        intercept,
    })
}

impl Lda {
    pub fn discriminants(&self, x: &[f64]) -> Vec<f64> {
        self.coef
            .iter()
            .zip(&self.intercept)
            .map(|(a, b)| b + a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>())
            .collect()
    }

    pub fn predict_one(&self, x: &[f64]) -> u32 {
        argmax_label(&self.classes, &self.discriminants(x))
    }
}
