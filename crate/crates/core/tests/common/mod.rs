#![allow(dead_code)]

use std::path::Path;

use svdd_clean::config::RunConfig;
use svdd_clean::numeric::{backward, forward, DenseNet};
use svdd_clean::synth::{generate, SynthDataset, SynthSpec};
use svdd_clean::workflow::{clean, CleanOutcome};

/// Area under the ROC curve by pairwise comparison; ties count one half.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let pos: Vec<f64> = scores.iter().zip(positive).filter(|(_, p)| **p).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(positive).filter(|(_, p)| !**p).map(|(s, _)| *s).collect();
    assert!(!pos.is_empty() && !neg.is_empty(), "AUC needs both classes");
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Loss `Σ g_i out_i`, whose gradient w.r.t. the output is `g`.
pub fn linear_loss(net: &DenseNet, x: &[f64], g: &[f64]) -> f64 {
    net.predict(x).unwrap().iter().zip(g).map(|(o, g)| o * g).sum()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Worst relative error between backward and central differences over
/// every weight, bias and input coordinate.
pub fn max_gradient_error(net: &DenseNet, x: &[f64], g: &[f64], h: f64) -> f64 {
    let (_, cache) = forward(net, x).unwrap();
    let (grads, gin) = backward(net, &cache, g).unwrap();
    let mut worst: f64 = 0.0;
    for l in 0..net.layers().len() {
        for k in 0..net.layers()[l].weight.len() {
            let fd = central(net, x, g, h, |n, d| n.params_mut().nth(l).unwrap().weight[k] += d);
            worst = worst.max(rel_err(grads.weight[l][k], fd));
        }
        if let Some(bias) = &net.layers()[l].bias {
            for k in 0..bias.len() {
                let fd = central(net, x, g, h, |n, d| n.params_mut().nth(l).unwrap().bias.as_mut().unwrap()[k] += d);
                worst = worst.max(rel_err(grads.bias[l].as_ref().unwrap()[k], fd));
            }
        }
    }
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let fd = (linear_loss(net, &xp, g) - linear_loss(net, &xm, g)) / (2.0 * h);
        worst = worst.max(rel_err(gin[i], fd));
    }
    worst
}

fn central(net: &DenseNet, x: &[f64], g: &[f64], h: f64, nudge: impl Fn(&mut DenseNet, f64)) -> f64 {
    let mut plus = net.clone();
    nudge(&mut plus, h);
    let mut minus = net.clone();
    nudge(&mut minus, -h);
    (linear_loss(&plus, x, g) - linear_loss(&minus, x, g)) / (2.0 * h)
}

/// Writes a synthetic dataset into `dir` and returns it with a run config
/// that reads its precomputed embeddings.
pub fn synth_config(spec: &SynthSpec, dir: &Path) -> (SynthDataset, RunConfig) {
    let data = generate(spec).unwrap();
    data.write(dir).unwrap();
    let mut config = RunConfig::default();
    for (k, v) in [
        ("data", dir.join("dataset.jsonl").display().to_string()),
        ("embedder", "precomputed".into()),
        ("embeddings", dir.join("embeddings.jsonl").display().to_string()),
        ("dim", spec.dim.to_string()),
        ("hidden_dims", "32,16".into()),
        ("seed", spec.seed.to_string()),
        ("out", dir.join("run").display().to_string()),
    ] {
        config.set(k, &v).unwrap();
    }
    (data, config)
}

pub fn run_synth(spec: &SynthSpec, dir: &Path) -> (SynthDataset, CleanOutcome) {
    let (data, config) = synth_config(spec, dir);
    let outcome = clean(&config).unwrap();
    (data, outcome)
}
