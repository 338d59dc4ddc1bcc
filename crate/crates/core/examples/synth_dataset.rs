// Generates a labeled synthetic set with injected outliers and writes it out.

use svdd_clean::error::Result;
use svdd_clean::synth::{generate, OutlierMode, SynthSpec};

pub fn run_example() -> Result<()> {
    for mode in [OutlierMode::FarPoint, OutlierMode::LabelFlip] {
        let spec = SynthSpec { n_per_class: 100, dim: 8, outlier_fraction: 0.1, outlier_mode: mode, ..SynthSpec::default() };
        let data = generate(&spec)?;
        println!("{mode:?}: {} records, {} injected", data.records.len(), data.injected_count());
        let first = data.records.iter().find(|r| r.is_injected).unwrap();
        println!("  e.g. {} labeled {} drawn from cluster {}", first.record.id, first.record.label, first.true_label);
    }
    let dir = std::env::temp_dir().join("svdd-clean-synth-example");
    generate(&SynthSpec { n_per_class: 50, ..SynthSpec::default() })?.write(&dir)?;
    println!("wrote dataset.jsonl, truth.jsonl and embeddings.jsonl to {}", dir.display());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
