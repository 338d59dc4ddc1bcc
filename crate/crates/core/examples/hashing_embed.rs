// Embeds a few sentences with the feature-hashing embedder.

use svdd_clean::embeddings::{embed, EmbeddingConfig};
use svdd_clean::error::Result;
use svdd_clean::pipeline::DatasetRecord;

pub fn run_example() -> Result<()> {
    let texts = ["the cat sat on the mat", "The Cat sat!", "stock prices fell sharply"];
    let records: Vec<DatasetRecord> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| DatasetRecord { id: i.to_string(), text: t.to_string(), label: 0 })
        .collect();
    let vectors = embed(&EmbeddingConfig::hashing(64), &records)?;
    for (t, v) in texts.iter().zip(&vectors) {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nonzero = v.iter().filter(|x| **x != 0.0).count();
        println!("{t:30} norm {norm:.6}  nonzero {nonzero}");
    }
    let cos: f64 = vectors[0].iter().zip(&vectors[1]).map(|(a, b)| a * b).sum();
    println!("cosine(0, 1) = {cos:.4}");
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
