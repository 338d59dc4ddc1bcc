// Pretrains an encoder/decoder pair on points near a 2-D subspace of R^16.

use svdd_clean::autoencoder::{pretrain, AutoencoderModel, PretrainConfig};
use svdd_clean::error::Result;
use svdd_clean::numeric::SeededRng;

pub fn run_example() -> Result<()> {
    let mut rng = SeededRng::new(1);
    let basis: Vec<Vec<f64>> = (0..2).map(|_| (0..16).map(|_| rng.normal() / 4.0).collect()).collect();
    let vectors: Vec<Vec<f64>> = (0..256)
        .map(|_| {
            let (a, b) = (rng.normal(), rng.normal());
            (0..16).map(|j| a * basis[0][j] + b * basis[1][j]).collect()
        })
        .collect();

    let model = AutoencoderModel::new(&[16, 8, 2], &mut rng)?;
    let before = model.reconstruction_loss(&vectors)?;
    let config = PretrainConfig { epochs: 60, ..PretrainConfig::default() };
    let (model, trace) = pretrain(model, &vectors, &config, &mut rng)?;
    println!("reconstruction loss {before:.5} -> {:.5} over {} epochs", trace.last().unwrap(), trace.len());
    let encoder = model.into_encoder();
    println!("encoder maps {} -> {} dims", encoder.input_dim(), encoder.output_dim());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
