//! Reconstruction pretraining for the encoder that Deep SVDD later reuses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{adam_update, backward, forward, AdamConfig, AdamState, DenseNet, ParamGrads, SeededRng};

pub const DEFAULT_ENCODER_DIMS: [usize; 3] = [384, 128, 32];
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_BATCH_SIZE: usize = 64;

/// Bias-free encoder `dim -> h1 -> h2` and its mirrored decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub encoder: DenseNet,
    pub decoder: DenseNet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            adam: AdamConfig::default(),
        }
    }
}

impl AutoencoderModel {
    pub fn new(encoder_dims: &[usize], rng: &mut SeededRng) -> Result<Self> {
        let encoder = DenseNet::init(encoder_dims, false, rng)?;
        let reversed: Vec<usize> = encoder_dims.iter().rev().copied().collect();
        let decoder = DenseNet::init(&reversed, false, rng)?;
        Ok(Self { encoder, decoder })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    /// Discards the decoder, keeping the weights Deep SVDD starts from.
    pub fn into_encoder(self) -> DenseNet {
        self.encoder
    }

    pub fn reconstruct(&self, vector: &[f64]) -> Result<Vec<f64>> {
        self.decoder.predict(&self.encoder.predict(vector)?)
    }

    /// Mean over `vectors` of the per-coordinate mean squared error.
    pub fn reconstruction_loss(&self, vectors: &[Vec<f64>]) -> Result<f64> {
        if vectors.is_empty() {
            return Err(Error::contract("reconstruction loss of an empty set"));
        }
        let mut total = 0.0;
        for v in vectors {
            let r = self.reconstruct(v)?;
            total += mse(&r, v);
        }
        Ok(total / vectors.len() as f64)
    }
}

pub fn encode(model: &AutoencoderModel, vector: &[f64]) -> Result<Vec<f64>> {
    model.encoder.predict(vector)
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Trains encoder and decoder jointly on reconstruction error. Returns the
/// trained model and the mean per-sample loss of each epoch.
pub fn pretrain(
    mut model: AutoencoderModel,
    vectors: &[Vec<f64>],
    config: &PretrainConfig,
    rng: &mut SeededRng,
) -> Result<(AutoencoderModel, Vec<f64>)> {
    if vectors.is_empty() {
        return Err(Error::contract("pretraining needs at least one vector"));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let dim = model.input_dim();
    if model.decoder.output_dim() != dim {
        return Err(Error::shape("decoder output", dim, model.decoder.output_dim()));
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::shape(format!("vector {i}"), dim, v.len()));
        }
    }

    let mut enc_state = AdamState::new(&model.encoder, config.adam)?;
    let mut dec_state = AdamState::new(&model.decoder, config.adam)?;
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut g_enc = ParamGrads::zeros_like(&model.encoder);
            let mut g_dec = ParamGrads::zeros_like(&model.decoder);
            let scale = 2.0 / (dim * batch.len()) as f64;
            for &i in batch {
                let x = &vectors[i];
                let (code, enc_cache) = forward(&model.encoder, x)?;
                let (recon, dec_cache) = forward(&model.decoder, &code)?;
                epoch_loss += mse(&recon, x);
                let grad_out: Vec<f64> = recon.iter().zip(x).map(|(r, t)| scale * (r - t)).collect();
                let (gd, grad_code) = backward(&model.decoder, &dec_cache, &grad_out)?;
                let (ge, _) = backward(&model.encoder, &enc_cache, &grad_code)?;
                g_dec.add_assign(&gd);
                g_enc.add_assign(&ge);
            }
            adam_update(&mut model.decoder, &g_dec, &mut dec_state)
                .map_err(|e| Error::Training(format!("epoch {epoch}: decoder: {e}")))?;
            adam_update(&mut model.encoder, &g_enc, &mut enc_state)
                .map_err(|e| Error::Training(format!("epoch {epoch}: encoder: {e}")))?;
        }
        let mean = epoch_loss / vectors.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Training(format!("non-finite reconstruction loss at epoch {epoch}")));
        }
        trace.push(mean);
    }
    Ok((model, trace))
}
