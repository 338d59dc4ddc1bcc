//! Fully connected networks with a fixed affine + activation graph.
//!
//! Weights are stored row-major (`out_dim x in_dim`). Every parameter
//! mutation bumps the network's version so that activation caches taken
//! before an update are rejected by [`backward`].

use serde::{Deserialize, Serialize};

use super::rng::SeededRng;
use crate::error::{Error, Result};

pub const LEAKY_RELU_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_RELU_ALPHA * z
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative; the leaky ReLU subgradient at 0 is alpha.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_RELU_ALPHA
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Option<Vec<f64>>,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn has_bias(&self) -> bool {
        self.bias.is_some()
    }

    #[inline]
    pub fn w(&self, row: usize, col: usize) -> f64 {
        self.weight[row * self.in_dim + col]
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.out_dim {
            let row = &self.weight[r * self.in_dim..(r + 1) * self.in_dim];
            let mut z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum();
            if let Some(b) = &self.bias {
                z += b[r];
            }
            out.push(z);
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.weight.iter().map(|w| w * w).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseNet {
    layers: Vec<LayerSpec>,
    #[serde(skip)]
    version: u64,
}

impl PartialEq for DenseNet {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

/// Activations recorded by [`forward`], sufficient for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    dims: Vec<(usize, usize)>,
    /// Input to each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    pre: Vec<Vec<f64>>,
}

/// Parameter gradients with the same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub weight: Vec<Vec<f64>>,
    pub bias: Vec<Option<Vec<f64>>>,
}

impl ParamGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weight: net.layers.iter().map(|l| vec![0.0; l.weight.len()]).collect(),
            bias: net
                .layers
                .iter()
                .map(|l| l.bias.as_ref().map(|b| vec![0.0; b.len()]))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &ParamGrads) {
        for (a, b) in self.weight.iter_mut().zip(&other.weight) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            if let (Some(a), Some(b)) = (a, b) {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weight {
            w.iter_mut().for_each(|x| *x *= factor);
        }
        for b in self.bias.iter_mut().flatten() {
            b.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.weight.iter().flatten().all(|&x| x == 0.0)
            && self.bias.iter().flatten().flatten().all(|&x| x == 0.0)
    }
}

impl DenseNet {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::contract("network needs at least one layer"));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.in_dim == 0 || l.out_dim == 0 {
                return Err(Error::contract(format!("layer {k} has a zero dimension")));
            }
            if l.weight.len() != l.in_dim * l.out_dim {
                return Err(Error::shape(
                    format!("layer {k} weight"),
                    l.in_dim * l.out_dim,
                    l.weight.len(),
                ));
            }
            if let Some(b) = &l.bias {
                if b.len() != l.out_dim {
                    return Err(Error::shape(format!("layer {k} bias"), l.out_dim, b.len()));
                }
            }
            if let Some(next) = layers.get(k + 1) {
                if next.in_dim != l.out_dim {
                    return Err(Error::shape(
                        format!("layer {} input", k + 1),
                        l.out_dim,
                        next.in_dim,
                    ));
                }
            }
        }
        Ok(Self { layers, version: 0 })
    }

    /// Builds `dims[0] -> dims[1] -> ...` with leaky ReLU on hidden layers and
    /// identity on the last, weights uniform in `±sqrt(6/(in+out))`.
    pub fn init(dims: &[usize], has_bias: bool, rng: &mut SeededRng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::contract("need at least an input and an output dimension"));
        }
        let n = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (in_dim, out_dim) = (w[0], w[1]);
                let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
                LayerSpec {
                    in_dim,
                    out_dim,
                    weight: (0..in_dim * out_dim).map(|_| rng.uniform(-limit, limit)).collect(),
                    bias: has_bias.then(|| vec![0.0; out_dim]),
                    activation: if k + 1 == n {
                        Activation::Identity
                    } else {
                        Activation::LeakyRelu
                    },
                }
            })
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Layer dimensions as `[in, hidden.., out]`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn has_bias(&self) -> bool {
        self.layers.iter().any(LayerSpec::has_bias)
    }

    /// Sum over layers of the squared Frobenius norm of the weights.
    pub fn weight_norm_sq(&self) -> f64 {
        self.layers.iter().map(LayerSpec::frobenius_sq).sum()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Mutable parameter access; invalidates outstanding caches.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut LayerSpec> {
        self.version += 1;
        self.layers.iter_mut()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weight.iter().all(|w| w.is_finite())
                && l.bias.iter().flatten().all(|b| b.is_finite())
        })
    }

    /// Output only, without recording a cache.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.affine(&cur, &mut next);
            next.iter_mut().for_each(|z| *z = l.activation.apply(*z));
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::shape("layer 0 input", self.input_dim(), input.len()));
        }
        Ok(())
    }
}

pub fn forward(net: &DenseNet, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    net.check_input(input)?;
    let mut inputs = Vec::with_capacity(net.layers.len());
    let mut pre = Vec::with_capacity(net.layers.len());
    let mut cur = input.to_vec();
    for l in &net.layers {
        let mut z = Vec::with_capacity(l.out_dim);
        l.affine(&cur, &mut z);
        let a: Vec<f64> = z.iter().map(|&v| l.activation.apply(v)).collect();
        inputs.push(std::mem::replace(&mut cur, a));
        pre.push(z);
    }
    let cache = ForwardCache {
        version: net.version,
        dims: net.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect(),
        inputs,
        pre,
    };
    Ok((cur, cache))
}

/// Returns parameter gradients and the gradient with respect to the input.
pub fn backward(
    net: &DenseNet,
    cache: &ForwardCache,
    output_gradient: &[f64],
) -> Result<(ParamGrads, Vec<f64>)> {
    let dims: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();
    if cache.dims != dims {
        return Err(Error::contract("forward cache was produced by a different network"));
    }
    if cache.version != net.version {
        return Err(Error::contract(
            "stale forward cache: network parameters changed after forward",
        ));
    }
    if output_gradient.len() != net.output_dim() {
        return Err(Error::shape(
            "output gradient",
            net.output_dim(),
            output_gradient.len(),
        ));
    }

    let mut grads = ParamGrads::zeros_like(net);
    let mut upstream = output_gradient.to_vec();
    for (k, l) in net.layers.iter().enumerate().rev() {
        let delta: Vec<f64> = upstream
            .iter()
            .zip(&cache.pre[k])
            .map(|(g, &z)| g * l.activation.derivative(z))
            .collect();
        let x = &cache.inputs[k];
        let gw = &mut grads.weight[k];
        for (r, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &mut gw[r * l.in_dim..(r + 1) * l.in_dim];
            row.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
        }
        if let Some(gb) = &mut grads.bias[k] {
            gb.copy_from_slice(&delta);
        }
        let mut down = vec![0.0; l.in_dim];
        for (r, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &l.weight[r * l.in_dim..(r + 1) * l.in_dim];
            down.iter_mut().zip(row).for_each(|(g, w)| *g += d * w);
        }
        upstream = down;
    }
    Ok((grads, upstream))
}
