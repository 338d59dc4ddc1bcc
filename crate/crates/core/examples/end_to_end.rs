// Full run in a temporary directory: synthesize, clean, refilter, evaluate.

use svdd_clean::config::RunConfig;
use svdd_clean::error::Result;
use svdd_clean::synth::{generate, SynthSpec};
use svdd_clean::workflow::{clean, evaluate, refilter};

pub fn run_example() -> Result<()> {
    let dir = tempfile::tempdir().map_err(|e| svdd_clean::error::Error::io(std::env::temp_dir(), e))?;
    let data = generate(&SynthSpec { n_per_class: 150, dim: 8, seed: 1, ..SynthSpec::default() })?;
    data.write(dir.path())?;

    let config = RunConfig::from_text(&format!(
        "data = {data}\nembedder = precomputed\nembeddings = {emb}\ndim = 8\nhidden_dims = 16,8\n\
         epochs_ae = 20\nepochs_svdd = 30\nallow_small_classes = true\nout = {out}\n",
        data = dir.path().join("dataset.jsonl").display(),
        emb = dir.path().join("embeddings.jsonl").display(),
        out = dir.path().join("run").display(),
    ))?;
    let outcome = clean(&config)?;
    for r in &outcome.reports {
        println!("threshold {:.1}: kept {} of {} ({:.1}%)", r.threshold, r.kept_total, r.total, r.data_coverage);
    }

    let run = outcome.run.root();
    refilter(run, &[0.5])?;
    let table = evaluate(run, &config.classifiers, &config.classifier_params, config.seed)?;
    print!("{}", String::from_utf8_lossy(&table.accuracy_csv()?));
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
