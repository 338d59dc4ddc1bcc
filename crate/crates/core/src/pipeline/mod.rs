//! Ingestion, splitting, per-class fitting, threshold filtering and run
//! persistence.

mod dataset;
mod filter;
mod fit;
pub mod persist;
mod split;

pub use dataset::{load_dataset, write_dataset_jsonl, ClassPartition, DatasetFormat, DatasetRecord};
pub use filter::{
    coverage_report, filter_by_threshold, format_percent, validate_threshold, ClassFilter, CoverageRow,
    CoverageSummary, FilterReport, DEFAULT_THRESHOLD, DEFAULT_THRESHOLDS, FORMAT_VERSION,
};
pub use fit::{fit_per_class, score_by_class, ClassFit, FitConfig, MIN_CLASS_SIZE};
pub use persist::{write_atomic, Manifest, RunDir};
pub use split::{split_train_test, test_count, TrainTestSplit, DEFAULT_TEST_FRACTION};

use crate::error::Result;

/// Fits per-class models on the training records, then returns the ids of
/// those whose normalized score is at most `threshold`, in input order.
pub fn filter_data(
    train: &[DatasetRecord],
    embeddings: &[Vec<f64>],
    config: &FitConfig,
    threshold: f64,
) -> Result<Vec<String>> {
    validate_threshold(threshold)?;
    let fits = fit_per_class(train, embeddings, config)?;
    let sets: Vec<_> = fits.into_iter().map(|f| (f.label, f.scores)).collect();
    let report = filter_by_threshold(&sets, threshold)?;
    let kept: std::collections::HashSet<&str> = report.kept_ids().collect();
    Ok(train
        .iter()
        .filter(|r| kept.contains(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect())
}
