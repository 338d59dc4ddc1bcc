//! One-Class Deep SVDD: train a bias-free encoder to pull every
//! representation toward a fixed center `c`, then score points by their
//! squared distance to it.
//!
//! The objective minimized is
//!
//! ```text
//! (1/n) Σ ||φ(x_i; W) - c||² + (λ/2) Σ_ℓ ||W^ℓ||²_F
//! ```
//!
//! The center is set once from the initial representations and never
//! updated; together with bias-free layers this rules out the trivial
//! solution where the encoder maps everything to `c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{adam_update, backward, forward, sq_dist, AdamConfig, AdamState, DenseNet, ParamGrads, SeededRng};

/// Coordinates of the initial center closer to zero than this are pushed out
/// to `±CENTER_EPS`.
pub const CENTER_EPS: f64 = 0.1;
pub const DEFAULT_WEIGHT_DECAY: f64 = 1e-6;
pub const DEFAULT_NU: f64 = 0.1;
pub const DEFAULT_EPOCHS: usize = 150;
pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepSvddModel {
    pub encoder: DenseNet,
    pub center: Option<Vec<f64>>,
    /// Square root of the `(1 - nu)` quantile of training scores. Reported
    /// only; it plays no part in the loss.
    pub radius: f64,
    pub weight_decay: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvddConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for SvddConfig {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            adam: AdamConfig::default(),
        }
    }
}

impl DeepSvddModel {
    pub fn new(encoder: DenseNet, weight_decay: f64, nu: f64) -> Result<Self> {
        if encoder.has_bias() {
            return Err(Error::contract("Deep SVDD encoder must be bias-free"));
        }
        if !(weight_decay >= 0.0 && weight_decay.is_finite()) {
            return Err(Error::Config(format!("weight decay must be >= 0, got {weight_decay}")));
        }
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::Config(format!("nu must lie in (0, 1], got {nu}")));
        }
        Ok(Self {
            encoder,
            center: None,
            radius: 0.0,
            weight_decay,
            nu,
        })
    }

    /// Sets the center from the current encoder; see [`init_center`].
    pub fn initialize_center(&mut self, vectors: &[Vec<f64>]) -> Result<()> {
        self.center = Some(init_center(&self.encoder, vectors)?);
        Ok(())
    }

    pub fn center(&self) -> Result<&[f64]> {
        self.center
            .as_deref()
            .ok_or_else(|| Error::contract("Deep SVDD center has not been initialized"))
    }

    /// Value of the training objective on `vectors`.
    pub fn objective(&self, vectors: &[Vec<f64>]) -> Result<f64> {
        if vectors.is_empty() {
            return Err(Error::contract("objective of an empty set"));
        }
        let raw = score(self, vectors)?;
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        Ok(mean + 0.5 * self.weight_decay * self.encoder.weight_norm_sq())
    }
}

/// Mean of the encoded vectors, with near-zero coordinates pushed to
/// `±0.1` (zero counts as positive).
pub fn init_center(encoder: &DenseNet, vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    if vectors.is_empty() {
        return Err(Error::contract("cannot initialize a center from no vectors"));
    }
    let mut c = vec![0.0; encoder.output_dim()];
    for v in vectors {
        let z = encoder.predict(v)?;
        c.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
    }
    let n = vectors.len() as f64;
    for x in &mut c {
        *x /= n;
        if x.abs() < CENTER_EPS {
            *x = if *x < 0.0 { -CENTER_EPS } else { CENTER_EPS };
        }
    }
    Ok(c)
}

/// Squared distance of each encoded vector to the center.
pub fn score(model: &DeepSvddModel, vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let c = model.center()?;
    vectors
        .iter()
        .map(|v| Ok(sq_dist(&model.encoder.predict(v)?, c)))
        .collect()
}

/// Trains the encoder with Adam on minibatches. The returned trace holds the
/// full-data objective after each epoch.
pub fn train_one_class(
    mut model: DeepSvddModel,
    vectors: &[Vec<f64>],
    config: &SvddConfig,
    rng: &mut SeededRng,
) -> Result<(DeepSvddModel, Vec<f64>)> {
    let center = model.center()?.to_vec();
    if vectors.is_empty() {
        return Err(Error::contract("Deep SVDD training needs at least one vector"));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if center.len() != model.encoder.output_dim() {
        return Err(Error::shape("center", model.encoder.output_dim(), center.len()));
    }

    let mut state = AdamState::new(&model.encoder, config.adam)?;
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    let lambda = model.weight_decay;

    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(config.batch_size) {
            let mut grads = ParamGrads::zeros_like(&model.encoder);
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let (z, cache) = forward(&model.encoder, &vectors[i])?;
                let g: Vec<f64> = z.iter().zip(&center).map(|(a, c)| scale * (a - c)).collect();
                grads.add_assign(&backward(&model.encoder, &cache, &g)?.0);
            }
            if lambda > 0.0 {
                for (gw, layer) in grads.weight.iter_mut().zip(model.encoder.layers()) {
                    gw.iter_mut().zip(&layer.weight).for_each(|(g, w)| *g += lambda * w);
                }
            }
            adam_update(&mut model.encoder, &grads, &mut state)
                .map_err(|e| Error::Training(format!("epoch {epoch}: {e}")))?;
        }
        let obj = model.objective(vectors)?;
        if !obj.is_finite() {
            return Err(Error::Training(format!("non-finite objective at epoch {epoch}")));
        }
        trace.push(obj);
    }

    let raw = score(&model, vectors)?;
    model.radius = quantile(&raw, 1.0 - model.nu).sqrt();
    Ok((model, trace))
}

/// Linear-interpolation quantile, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Min-max normalization into `[0, 1]`; a constant set maps to all zeros.
pub fn normalize_scores(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::contract("cannot normalize an empty score set"));
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span <= 0.0 {
        return Ok(vec![0.0; raw.len()]);
    }
    Ok(raw
        .iter()
        .map(|&s| {
            if s == max {
                1.0
            } else {
                ((s - min) / span).clamp(0.0, 1.0)
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub ids: Vec<String>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl ScoreSet {
    pub fn new(ids: Vec<String>, raw: Vec<f64>) -> Result<Self> {
        if ids.len() != raw.len() {
            return Err(Error::shape("score ids", raw.len(), ids.len()));
        }
        if let Some(s) = raw.iter().find(|s| !(**s >= 0.0)) {
            return Err(Error::contract(format!("raw scores must be non-negative, got {s}")));
        }
        let normalized = normalize_scores(&raw)?;
        Ok(Self { ids, raw, normalized })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}
