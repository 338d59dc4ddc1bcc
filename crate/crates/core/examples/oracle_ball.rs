// Exact and soft-margin enclosing balls for a cluster with one far point.

use svdd_clean::error::Result;
use svdd_clean::numeric::SeededRng;
use svdd_clean::oracle::{min_enclosing_ball, soft_svdd};

pub fn run_example() -> Result<()> {
    let mut rng = SeededRng::new(4);
    let mut points: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.normal() * 0.5, rng.normal() * 0.5]).collect();
    points.push(vec![10.0, 10.0]);

    let hard = min_enclosing_ball(&points)?;
    println!("hard margin: radius {:.4} center {:.3?}", hard.radius, hard.center);
    for nu in [0.01, 0.05, 0.2] {
        let soft = soft_svdd(&points, nu, 5000, &mut SeededRng::new(0))?;
        let far = soft.most_outlying(&points).unwrap();
        println!(
            "nu {nu:<4}: radius {:.4} objective {:.4} most outlying #{far} (slack {:.3})",
            soft.ball.radius, soft.objective, soft.slacks[far]
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
