//! Dense networks, Adam, and the seeded generator shared by every trainer.

mod adam;
mod net;
mod rng;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use net::{backward, forward, Activation, DenseNet, ForwardCache, LayerSpec, ParamGrads, LEAKY_RELU_ALPHA};
pub use rng::SeededRng;

/// Squared Euclidean distance.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn mean_vector(vectors: &[Vec<f64>]) -> Option<Vec<f64>> {
    let first = vectors.first()?;
    let mut acc = vec![0.0; first.len()];
    for v in vectors {
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    let n = vectors.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Some(acc)
}
