//! End-to-end runs over a run directory: `clean` trains and filters,
//! `refilter` re-applies thresholds to persisted scores and `evaluate`
//! compares downstream classifiers across the persisted reports.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{evaluate_split, ClassifierKind, ClassifierParams, EvalResult, TrainedClassifier};
use crate::config::RunConfig;
use crate::deep_svdd::ScoreSet;
use crate::embeddings::{embed, read_embedding_file, write_embedding_file, EmbeddingEntry};
use crate::error::{Error, Result};
use crate::numeric::SeededRng;
use crate::pipeline::persist::{read_json, read_scores, write_json, write_scores};
use crate::pipeline::{
    filter_by_threshold, fit_per_class, format_percent, load_dataset, score_by_class, split_train_test, write_atomic,
    ClassFit, ClassPartition, DatasetFormat, DatasetRecord, FilterReport, FitConfig, Manifest, RunDir,
    FORMAT_VERSION,
};

const SPLIT_STREAM: u64 = u64::MAX;
const EVAL_STREAM: u64 = u64::MAX - 1;

#[derive(Debug)]
pub struct CleanOutcome {
    pub run: RunDir,
    pub manifest: Manifest,
    pub fits: Vec<ClassFit>,
    pub test_scores: Vec<(u32, ScoreSet)>,
    pub reports: Vec<FilterReport>,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn model_refs(run: &RunDir, labels: impl Iterator<Item = u32>) -> Vec<String> {
    labels
        .map(|l| run.model(l))
        .filter(|p| p.exists())
        .map(|p| {
            p.strip_prefix(run.root())
                .unwrap_or(&p)
                .to_string_lossy()
                .replace('\\', "/")
        })
        .collect()
}

fn write_reports(
    run: &RunDir,
    train_sets: &[(u32, ScoreSet)],
    thresholds: &[f64],
    seed: u64,
) -> Result<Vec<FilterReport>> {
    let models = model_refs(run, train_sets.iter().map(|(l, _)| *l));
    let created_at = timestamp();
    thresholds
        .iter()
        .map(|&t| {
            let report = FilterReport {
                model_files: models.clone(),
                seed: Some(seed),
                created_at: Some(created_at.clone()),
                ..filter_by_threshold(train_sets, t)?
            };
            write_json(&run.report(t), &report)?;
            Ok(report)
        })
        .collect()
}

/// Loads, embeds, splits, trains one model per class, scores both splits
/// and writes a report per configured threshold into `config.out`.
pub fn clean(config: &RunConfig) -> Result<CleanOutcome> {
    config.validate()?;
    let data = config
        .data
        .as_deref()
        .ok_or_else(|| Error::Config("a dataset is required (--data)".into()))?;
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("an output directory is required (--out)".into()))?;
    let format = match config.format {
        Some(f) => f,
        None => DatasetFormat::from_path(data)?,
    };

    let records = load_dataset(data, format)?;
    if records.is_empty() {
        return Err(Error::Data(format!("{} contains no records", data.display())));
    }
    let partition = ClassPartition::from_records(&records);
    if !config.fit.allow_small_classes {
        for (&label, ids) in &partition.groups {
            if ids.len() < config.fit.min_class_size {
                return Err(Error::SmallClass {
                    label,
                    count: ids.len(),
                    min: config.fit.min_class_size,
                });
            }
        }
    }

    let vectors = embed(&config.embedding, &records)?;
    let split = split_train_test(&records, config.test_fraction, &mut SeededRng::new(config.seed).derive(SPLIT_STREAM))?;
    let index: HashMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let gather = |ids: &[String]| -> (Vec<DatasetRecord>, Vec<Vec<f64>>) {
        ids.iter()
            .map(|id| {
                let i = index[id.as_str()];
                (records[i].clone(), vectors[i].clone())
            })
            .unzip()
    };
    let (train, train_vectors) = gather(&split.train);
    let (test, test_vectors) = gather(&split.test);

    let run = RunDir::new(out);
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_atomic(&run.config(), config.to_text().as_bytes())?;

    // the size rule was enforced on whole classes above
    let fit_config = FitConfig {
        allow_small_classes: true,
        ..config.fit_config()
    };
    let fits = fit_per_class(&train, &train_vectors, &fit_config)?;
    let train_sets: Vec<(u32, ScoreSet)> = fits.iter().map(|f| (f.label, f.scores.clone())).collect();
    let test_scores = score_by_class(&fits, &test, &test_vectors)?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        dataset: data.display().to_string(),
        format: format.to_string(),
        n_records: records.len(),
        labels: partition.groups.iter().map(|(l, ids)| (*l, ids.len())).collect(),
        split,
        seed: config.seed,
    };
    write_json(&run.manifest(), &manifest)?;
    let entries: Vec<EmbeddingEntry> = records
        .iter()
        .zip(&vectors)
        .map(|(r, v)| EmbeddingEntry {
            id: r.id.clone(),
            vector: v.clone(),
        })
        .collect();
    write_embedding_file(&run.embeddings(), &entries)?;
    write_scores(&run.train_scores(), &train_sets)?;
    write_scores(&run.test_scores(), &test_scores)?;
    let reports = write_reports(&run, &train_sets, &config.thresholds, config.seed)?;

    Ok(CleanOutcome {
        run,
        manifest,
        fits,
        test_scores,
        reports,
    })
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Data(format!("missing run artifact {}", path.display())))
    }
}

/// Re-applies `thresholds` to the persisted training scores, without
/// retraining, and writes one report per threshold.
pub fn refilter(run_dir: &Path, thresholds: &[f64]) -> Result<Vec<FilterReport>> {
    let run = RunDir::new(run_dir);
    require(&run.manifest())?;
    require(&run.train_scores())?;
    if thresholds.is_empty() {
        return Err(Error::Config("at least one threshold is required".into()));
    }
    for &t in thresholds {
        crate::pipeline::validate_threshold(t).map_err(|e| Error::Config(e.to_string()))?;
    }
    let manifest: Manifest = read_json(&run.manifest())?;
    let train_sets = read_scores(&run.train_scores())?;
    write_reports(&run, &train_sets, thresholds, manifest.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub threshold: f64,
    pub classifier: ClassifierKind,
    /// Training records kept at this threshold.
    pub n_train: usize,
    pub data_coverage: f64,
    pub result: EvalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub format_version: u32,
    pub dataset: String,
    pub seed: u64,
    pub classifiers: Vec<ClassifierKind>,
    pub rows: Vec<EvalRow>,
}

fn dataset_name(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

fn threshold_label(t: f64) -> String {
    format!("{t:?}")
}

impl EvalTable {
    /// Overall test accuracy per classifier, one row per threshold.
    pub fn accuracy_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["Dataset".to_string(), "Threshold".to_string()];
        header.extend(self.classifiers.iter().map(|k| k.title().to_string()));
        w.write_record(&header).map_err(csv_err)?;
        let mut by_threshold: BTreeMap<u64, Vec<&EvalRow>> = BTreeMap::new();
        for row in &self.rows {
            by_threshold.entry(row.threshold.to_bits()).or_default().push(row);
        }
        let name = dataset_name(&self.dataset);
        for rows in by_threshold.values() {
            let mut record = vec![name.clone(), threshold_label(rows[0].threshold)];
            for kind in &self.classifiers {
                let acc = rows.iter().find(|r| r.classifier == *kind).map(|r| r.result.accuracy);
                record.push(acc.map(|a| format_percent(100.0 * a)).unwrap_or_default());
            }
            w.write_record(&record).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Data(e.to_string()))
    }

    /// Inlier, outlier and weighted accuracy per threshold and classifier.
    pub fn inlier_outlier_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "Dataset",
            "Threshold",
            "Classifier",
            "Data Coverage",
            "Inlier",
            "Outlier",
            "Weighted",
            "Accuracy",
            "n_inlier",
            "n_outlier",
            "n_train",
        ])
        .map_err(csv_err)?;
        let name = dataset_name(&self.dataset);
        for row in &self.rows {
            let r = &row.result;
            w.write_record([
                name.clone(),
                threshold_label(row.threshold),
                row.classifier.title().to_string(),
                format_percent(row.data_coverage),
                format_percent(100.0 * r.accuracy_inlier),
                format_percent(100.0 * r.accuracy_outlier),
                format_percent(100.0 * r.weighted),
                format_percent(100.0 * r.accuracy),
                r.n_inlier.to_string(),
                r.n_outlier.to_string(),
                row.n_train.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Data(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}

/// Trains every classifier on the records each report kept and evaluates
/// it on the full, unfiltered test split. Writes `eval.json` and both CSV
/// tables into the run directory.
pub fn evaluate(
    run_dir: &Path,
    classifiers: &[ClassifierKind],
    params: &ClassifierParams,
    seed: u64,
) -> Result<EvalTable> {
    let run = RunDir::new(run_dir);
    for p in [run.manifest(), run.embeddings(), run.train_scores(), run.test_scores()] {
        require(&p)?;
    }
    if classifiers.is_empty() {
        return Err(Error::Config("at least one classifier is required".into()));
    }
    let thresholds = run.report_thresholds()?;
    if thresholds.is_empty() {
        return Err(Error::Data(format!("no reports in {}", run_dir.display())));
    }
    let manifest: Manifest = read_json(&run.manifest())?;
    let vectors: HashMap<String, Vec<f64>> = read_embedding_file(&run.embeddings())?
        .into_iter()
        .map(|e| (e.id, e.vector))
        .collect();
    let labelled = |sets: Vec<(u32, ScoreSet)>| -> HashMap<String, (u32, f64)> {
        sets.into_iter()
            .flat_map(|(l, s)| {
                s.ids
                    .into_iter()
                    .zip(s.normalized)
                    .map(move |(id, n)| (id, (l, n)))
            })
            .collect()
    };
    let train_info = labelled(read_scores(&run.train_scores())?);
    let test_info = labelled(read_scores(&run.test_scores())?);

    let lookup = |id: &String, info: &HashMap<String, (u32, f64)>| -> Result<(Vec<f64>, u32, f64)> {
        let (label, norm) = info
            .get(id)
            .ok_or_else(|| Error::Data(format!("record {id:?} has no persisted score")))?;
        let v = vectors
            .get(id)
            .ok_or_else(|| Error::Data(format!("record {id:?} has no persisted embedding")))?;
        Ok((v.clone(), *label, *norm))
    };
    let mut test_x = Vec::new();
    let mut test_y = Vec::new();
    let mut test_s = Vec::new();
    for id in &manifest.split.test {
        let (v, l, s) = lookup(id, &test_info)?;
        test_x.push(v);
        test_y.push(l);
        test_s.push(s);
    }
    if test_x.is_empty() {
        return Err(Error::Data("the test split is empty".into()));
    }

    let mut jobs = Vec::new();
    for &t in &thresholds {
        let report: FilterReport = read_json(&run.report(t))?;
        let kept: HashSet<&str> = report.kept_ids().collect();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for id in manifest.split.train.iter().filter(|id| kept.contains(id.as_str())) {
            let (v, l, _) = lookup(id, &train_info)?;
            x.push(v);
            y.push(l);
        }
        let coverage = report.data_coverage;
        for (k, &kind) in ClassifierKind::ALL.iter().enumerate() {
            if classifiers.contains(&kind) {
                jobs.push((t, kind, k as u64, coverage, x.clone(), y.clone()));
            }
        }
    }

    let root = SeededRng::new(seed).derive(EVAL_STREAM);
    let rows: Vec<EvalRow> = jobs
        .into_par_iter()
        .map(|(t, kind, stream, coverage, x, y)| {
            let mut rng = root.derive(stream);
            let model = TrainedClassifier::fit(kind, &x, &y, params, &mut rng)
                .map_err(|e| Error::Data(format!("{} at threshold {t}: {e}", kind.title())))?;
            Ok(EvalRow {
                threshold: t,
                classifier: kind,
                n_train: x.len(),
                data_coverage: coverage,
                result: evaluate_split(&model, &test_x, &test_y, &test_s, t)?,
            })
        })
        .collect::<Result<_>>()?;

    let table = EvalTable {
        format_version: FORMAT_VERSION,
        dataset: manifest.dataset.clone(),
        seed,
        classifiers: ClassifierKind::ALL
            .iter()
            .copied()
            .filter(|k| classifiers.contains(k))
            .collect(),
        rows,
    };
    write_json(&run.eval_json(), &table)?;
    write_atomic(&run.eval_accuracy_csv(), &table.accuracy_csv()?)?;
    write_atomic(&run.eval_inlier_outlier_csv(), &table.inlier_outlier_csv()?)?;
    Ok(table)
}
