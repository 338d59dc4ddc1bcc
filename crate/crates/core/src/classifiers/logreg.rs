use serde::{Deserialize, Serialize};

use super::{argmax_label, check_training, class_index};
use crate::error::{Error, Result};
use crate::numeric::SeededRng;

/// Multinomial softmax regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    /// Sorted class labels; row `k` of `weights` belongs to `classes[k]`.
    pub classes: Vec<u32>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Mean cross-entropy before each epoch's update.
    pub loss_trace: Vec<f64>,
}

pub fn fit_logistic_regression(
    vectors: &[Vec<f64>],
    labels: &[u32],
    epochs: usize,
    lr: f64,
    rng: &mut SeededRng,
) -> Result<LogisticRegression> {
    check_training(vectors, labels)?;
    let (classes, y) = class_index(labels);
    if classes.len() < 2 {
        return Err(Error::contract("logistic regression needs at least two classes"));
    }
    if !(lr > 0.0) {
        return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
    }
    let dim = vectors[0].len();
    let k = classes.len();
    let n = vectors.len() as f64;
    let mut weights: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.uniform(-0.01, 0.01)).collect())
        .collect();
    let mut bias = vec![0.0; k];
    let mut loss_trace = Vec::with_capacity(epochs);

    let mut probs = vec![0.0; k];
    for _ in 0..epochs {
        let mut gw = vec![vec![0.0; dim]; k];
        let mut gb = vec![0.0; k];
        let mut loss = 0.0;
        for (x, &yi) in vectors.iter().zip(&y) {
            softmax_into(&weights, &bias, x, &mut probs);
            loss -= probs[yi].max(1e-300).ln();
            for c in 0..k {
                let d = probs[c] - if c == yi { 1.0 } else { 0.0 };
                gb[c] += d;
                gw[c].iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
            }
        }
        loss_trace.push(loss / n);
        for c in 0..k {
            bias[c] -= lr * gb[c] / n;
            weights[c].iter_mut().zip(&gw[c]).for_each(|(w, g)| *w -= lr * g / n);
        }
    }
    Ok(LogisticRegression {
        classes,
        weights,
        bias,
        loss_trace,
    })
}

fn logits(weights: &[Vec<f64>], bias: &[f64], x: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(bias)
        .map(|(w, b)| b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>())
        .collect()
}

fn softmax_into(weights: &[Vec<f64>], bias: &[f64], x: &[f64], out: &mut [f64]) {
    let z = logits(weights, bias, x);
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, zi) in out.iter_mut().zip(&z) {
        *o = (zi - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

impl LogisticRegression {
    pub fn predict_one(&self, x: &[f64]) -> u32 {
        argmax_label(&self.classes, &logits(&self.weights, &self.bias, x))
    }
}
