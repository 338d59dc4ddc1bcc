//! The `svdd-clean` command line. [`run`] parses arguments, dispatches to
//! [`crate::workflow`] and returns the process exit code: 0 on success, 2
//! for configuration errors, 3 for data errors and 4 for training errors.

use std::ffi::OsString;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::numeric::{sq_dist, SeededRng};
use crate::oracle::{min_enclosing_ball, most_outlying, soft_svdd, DEFAULT_ITERATIONS};
use crate::pipeline::{coverage_report, FilterReport};
use crate::synth::{generate, OutlierMode, SynthSpec};
use crate::workflow;

#[derive(Parser, Debug)]
#[command(name = "svdd-clean", version, about = "Per-class Deep SVDD outlier filtering for labeled text datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train per-class models, score records and write filter reports.
    Clean(RunArgs),
    /// Compare classifiers trained on filtered data across thresholds.
    Eval(EvalArgs),
    /// Write a synthetic dataset with injected outliers.
    Synth(SynthArgs),
    /// Solve input-space SVDD exactly on a small point file.
    Oracle(OracleArgs),
    /// Re-apply thresholds to the scores of an existing run.
    Refilter(RefilterArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<String>,
    /// jsonl or csv; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
    /// precomputed, hashing or remote.
    #[arg(long)]
    embedder: Option<String>,
    /// Embedding file for the precomputed embedder.
    #[arg(long)]
    embeddings: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// Single threshold; replaces the default sweep.
    #[arg(long, conflicts_with = "thresholds")]
    threshold: Option<String>,
    /// Comma-separated thresholds.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    allow_small_classes: bool,
    /// Comma-separated subset of tree, knn, logreg, lda.
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    epochs_ae: Option<String>,
    #[arg(long)]
    epochs_svdd: Option<String>,
    /// Weight decay on the encoder weights.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// Encoder widths after the input, e.g. 128,32.
    #[arg(long)]
    hidden_dims: Option<String>,
    #[arg(long)]
    test_fraction: Option<String>,
    /// Any configuration key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn assignments(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |key: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((key, v.clone()));
            }
        };
        push("data", &self.data);
        push("format", &self.format);
        push("embedder", &self.embedder);
        push("embeddings", &self.embeddings);
        push("dim", &self.dim);
        push("threshold", &self.threshold);
        push("thresholds", &self.thresholds);
        push("seed", &self.seed);
        push("out", &self.out);
        push("classifiers", &self.classifiers);
        push("epochs_ae", &self.epochs_ae);
        push("epochs_svdd", &self.epochs_svdd);
        push("lambda", &self.lambda);
        push("nu", &self.nu);
        push("hidden_dims", &self.hidden_dims);
        push("test_fraction", &self.test_fraction);
        if self.allow_small_classes {
            out.push(("allow_small_classes", "true".into()));
        }
        out
    }

    /// Defaults, then `base` (if any), then `--config`, then flags.
    fn resolve(&self, base: Option<RunConfig>) -> Result<RunConfig> {
        let mut config = base.unwrap_or_default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            config.apply_text(&text)?;
        }
        for (key, value) in self.assignments() {
            config
                .set(key, &value)
                .map_err(|e| Error::Config(format!("--{}: {}", key.replace('_', "-"), strip(e))))?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            config.set(k.trim(), v.trim())?;
        }
        Ok(config)
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Run directory written by `clean`.
    #[arg(long)]
    run: PathBuf,
    #[command(flatten)]
    overrides: RunArgs,
}

#[derive(Args, Debug)]
struct RefilterArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long, conflicts_with = "thresholds")]
    threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    n_classes: usize,
    #[arg(long, default_value_t = 600)]
    n_per_class: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    cluster_std: f64,
    /// Fraction of each class to corrupt.
    #[arg(long, alias = "outlier-fraction", default_value_t = 0.05)]
    rho: f64,
    /// label_flip or far_point.
    #[arg(long, default_value = "far_point")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// JSONL of points: `{"id": "a", "point": [x, y]}` or a bare array per line.
    #[arg(long)]
    points: PathBuf,
    /// Soft-margin parameter; omit for the minimum enclosing ball.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Clean(a) => cmd_clean(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Refilter(a) => cmd_refilter(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("svdd-clean: {e}");
            e.exit_code()
        }
    }
}

fn print_coverage(reports: &[FilterReport]) {
    for r in reports {
        print!("{}", coverage_report(r).to_text());
    }
}

fn cmd_clean(args: &RunArgs) -> Result<()> {
    let config = args.resolve(None)?;
    let outcome = workflow::clean(&config)?;
    for fit in &outcome.fits {
        println!(
            "class {}: {} records, final objective {:.6}, radius {:.6}",
            fit.label,
            fit.scores.len(),
            fit.svdd_trace.last().copied().unwrap_or(f64::NAN),
            fit.model.radius,
        );
    }
    print_coverage(&outcome.reports);
    println!("wrote {}", outcome.run.root().display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let run = crate::pipeline::RunDir::new(&args.run);
    let base = if run.config().exists() {
        Some(RunConfig::from_file(&run.config())?)
    } else {
        None
    };
    let config = args.overrides.resolve(base)?;
    let table = workflow::evaluate(&args.run, &config.classifiers, &config.classifier_params, config.seed)?;
    print!("{}", String::from_utf8_lossy(&table.inlier_outlier_csv()?));
    Ok(())
}

fn cmd_refilter(args: &RefilterArgs) -> Result<()> {
    let thresholds = match args.threshold {
        Some(t) => vec![t],
        None if args.thresholds.is_empty() => crate::pipeline::DEFAULT_THRESHOLDS.to_vec(),
        None => args.thresholds.clone(),
    };
    let reports = workflow::refilter(&args.run, &thresholds)?;
    print_coverage(&reports);
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_classes: args.n_classes,
        n_per_class: args.n_per_class,
        dim: args.dim,
        cluster_std: args.cluster_std,
        outlier_fraction: args.rho,
        outlier_mode: args.mode.parse::<OutlierMode>()?,
        seed: args.seed,
    };
    let data = generate(&spec).map_err(|e| Error::Config(strip(e)))?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    data.write(&args.out)?;
    println!(
        "wrote {} records ({} injected) to {}",
        data.records.len(),
        data.injected_count(),
        args.out.display()
    );
    Ok(())
}

/// Reads a point file. Lines are either `{"id"?, "point": [...]}` objects
/// or bare arrays; missing ids become the zero-based row index.
pub fn read_points(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Line {
        Tagged { id: Option<String>, point: Vec<f64> },
        Bare(Vec<f64>),
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (mut ids, mut points) = (Vec::new(), Vec::new());
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line)
            .map_err(|e| Error::parse(Some(i + 1), format!("{}: {e}", path.display())))?;
        let (id, p) = match parsed {
            Line::Tagged { id, point } => (id, point),
            Line::Bare(p) => (None, p),
        };
        if let Some(dim) = points.first().map(Vec::len) {
            if p.len() != dim {
                return Err(Error::shape(format!("point on line {}", i + 1), dim, p.len()));
            }
        }
        ids.push(id.unwrap_or_else(|| points.len().to_string()));
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Data(format!("{} contains no points", path.display())));
    }
    Ok((ids, points))
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let (ids, points) = read_points(&args.points)?;
    let (ball, slacks, outlying) = match args.nu {
        None => {
            let ball = min_enclosing_ball(&points)?;
            let r2 = ball.radius * ball.radius;
            let slacks: Vec<f64> = points.iter().map(|p| (sq_dist(p, &ball.center) - r2).max(0.0)).collect();
            let far = most_outlying(&points, &slacks, ball.radius).unwrap_or(0);
            println!("method minimum_enclosing_ball");
            (ball, slacks, far)
        }
        Some(nu) => {
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(Error::Config(format!("nu must lie in (0, 1], got {nu}")));
            }
            let sol = soft_svdd(&points, nu, args.iterations, &mut SeededRng::new(args.seed))?;
            let far = sol.most_outlying(&points).unwrap_or(0);
            println!("method soft_svdd nu={nu} objective={:.9}", sol.objective);
            (sol.ball, sol.slacks, far)
        }
    };
    println!("radius {:.9}", ball.radius);
    let center: Vec<String> = ball.center.iter().map(|c| format!("{c:.9}")).collect();
    println!("center [{}]", center.join(", "));
    for (id, s) in ids.iter().zip(&slacks) {
        println!("slack {id} {s:.9}");
    }
    println!("most_outlying {}", ids[outlying]);
    Ok(())
}
