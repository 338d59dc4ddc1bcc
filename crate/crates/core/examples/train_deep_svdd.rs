// Trains a one-class model on a Gaussian cluster and scores a few probes.

use svdd_clean::deep_svdd::{normalize_scores, score, train_one_class, DeepSvddModel, SvddConfig};
use svdd_clean::error::Result;
use svdd_clean::numeric::{DenseNet, SeededRng};

pub fn run_example() -> Result<()> {
    let mut rng = SeededRng::new(7);
    let train: Vec<Vec<f64>> = (0..300).map(|_| (0..4).map(|_| 2.0 + rng.normal()).collect()).collect();

    let encoder = DenseNet::init(&[4, 16, 4], false, &mut rng)?;
    let mut model = DeepSvddModel::new(encoder, 1e-6, 0.1)?;
    model.initialize_center(&train)?;
    let config = SvddConfig { epochs: 40, ..SvddConfig::default() };
    let (model, trace) = train_one_class(model, &train, &config, &mut rng)?;
    println!("objective {:.5} -> {:.5}, radius {:.4}", trace[0], trace.last().unwrap(), model.radius);

    let probes = vec![vec![2.0; 4], vec![3.0; 4], vec![8.0, -4.0, 8.0, -4.0]];
    let raw = score(&model, &probes)?;
    for ((p, r), n) in probes.iter().zip(&raw).zip(normalize_scores(&raw)?) {
        println!("{p:?}: raw {r:.5}, normalized {n:.3}");
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
