// Trains every classifier on a noisy two-class set and splits test accuracy
// into inliers and outliers by a score threshold.

use svdd_clean::classifiers::{evaluate_split, ClassifierKind, ClassifierParams, TrainedClassifier};
use svdd_clean::error::Result;
use svdd_clean::numeric::SeededRng;

pub fn run_example() -> Result<()> {
    let mut rng = SeededRng::new(5);
    let mut sample = |n: usize| {
        let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..n {
            let label = (i % 2) as u32;
            let cx = if label == 0 { -2.0 } else { 2.0 };
            let wild = rng.uniform(0.0, 1.0) < 0.1;
            let spread = if wild { 4.0 } else { 1.0 };
            x.push(vec![cx + spread * rng.normal(), spread * rng.normal()]);
            y.push(label);
            s.push(if wild { 0.9 } else { 0.1 });
        }
        (x, y, s)
    };
    let (train_x, train_y, _) = sample(400);
    let (test_x, test_y, test_s) = sample(200);

    let params = ClassifierParams::default();
    for kind in ClassifierKind::ALL {
        let model = TrainedClassifier::fit(kind, &train_x, &train_y, &params, &mut SeededRng::new(0))?;
        let r = evaluate_split(&model, &test_x, &test_y, &test_s, 0.5)?;
        println!(
            "{:20} accuracy {:.3}  inlier {:.3} ({})  outlier {:.3} ({})  weighted {:.3}",
            kind.title(), r.accuracy, r.accuracy_inlier, r.n_inlier, r.accuracy_outlier, r.n_outlier, r.weighted
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
