// Fits one model per label, then filters the training records at several
// thresholds and prints the coverage tables.

use svdd_clean::error::Result;
use svdd_clean::pipeline::{coverage_report, filter_by_threshold, fit_per_class, FitConfig};
use svdd_clean::synth::{generate, SynthSpec};

pub fn run_example() -> Result<()> {
    let data = generate(&SynthSpec { n_per_class: 200, dim: 8, seed: 3, ..SynthSpec::default() })?;
    let mut config = FitConfig { hidden_dims: vec![16, 8], allow_small_classes: true, seed: 3, ..FitConfig::default() };
    config.pretrain.epochs = 20;
    config.svdd.epochs = 30;

    let fits = fit_per_class(&data.dataset_records(), &data.vectors(), &config)?;
    let scores: Vec<_> = fits.iter().map(|f| (f.label, f.scores.clone())).collect();
    for t in [0.4, 0.8, 1.0] {
        let report = filter_by_threshold(&scores, t)?;
        let injected_removed = report
            .removed_ids()
            .filter(|id| data.records.iter().any(|r| r.record.id == *id && r.is_injected))
            .count();
        print!("{}", coverage_report(&report).to_text());
        println!("injected among removed: {injected_removed} of {}\n", data.injected_count());
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
