use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::deep_svdd::ScoreSet;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.6;
pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFilter {
    pub label: u32,
    pub kept: Vec<String>,
    pub removed: Vec<String>,
    /// Percentage of this class kept.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub format_version: u32,
    pub threshold: f64,
    pub classes: Vec<ClassFilter>,
    pub total: usize,
    pub kept_total: usize,
    /// Percentage of all records kept.
    pub data_coverage: f64,
    #[serde(default)]
    pub model_files: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl FilterReport {
    pub fn kept_ids(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().flat_map(|c| c.kept.iter().map(String::as_str))
    }

    pub fn removed_ids(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().flat_map(|c| c.removed.iter().map(String::as_str))
    }

    /// Copy with timestamps cleared, for reproducibility comparisons.
    pub fn without_timestamps(&self) -> Self {
        Self {
            created_at: None,
            ..self.clone()
        }
    }

    /// File name used inside a run directory, e.g. `report_0.600.json`.
    pub fn file_name(threshold: f64) -> String {
        format!("report_{threshold:.3}.json")
    }
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        100.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn validate_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::contract(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    Ok(())
}

/// Keeps a record iff its normalized score is at most `threshold`.
pub fn filter_by_threshold(score_sets: &[(u32, ScoreSet)], threshold: f64) -> Result<FilterReport> {
    validate_threshold(threshold)?;
    let mut classes = Vec::with_capacity(score_sets.len());
    let (mut total, mut kept_total) = (0, 0);
    for (label, set) in score_sets {
        let mut kept = Vec::new();
        let mut removed = Vec::new();
        for (id, &s) in set.ids.iter().zip(&set.normalized) {
            if s <= threshold {
                kept.push(id.clone());
            } else {
                removed.push(id.clone());
            }
        }
        total += set.len();
        kept_total += kept.len();
        classes.push(ClassFilter {
            label: *label,
            coverage: percent(kept.len(), set.len()),
            kept,
            removed,
        });
    }
    Ok(FilterReport {
        format_version: FORMAT_VERSION,
        threshold,
        classes,
        total,
        kept_total,
        data_coverage: percent(kept_total, total),
        model_files: Vec::new(),
        seed: None,
        created_at: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub label: Option<u32>,
    pub total: usize,
    pub kept: usize,
    pub removed: usize,
    /// Three-decimal percentage string, e.g. `"65.630%"`.
    pub coverage: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub format_version: u32,
    pub threshold: f64,
    pub classes: Vec<CoverageRow>,
    pub overall: CoverageRow,
}

impl CoverageSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "threshold {:.3}", self.threshold);
        let _ = writeln!(s, "{:>8} {:>8} {:>8} {:>8} {:>10}", "label", "total", "kept", "removed", "coverage");
        for r in self.classes.iter().chain(std::iter::once(&self.overall)) {
            let label = r.label.map_or_else(|| "overall".to_string(), |l| l.to_string());
            let _ = writeln!(s, "{:>8} {:>8} {:>8} {:>8} {:>10}", label, r.total, r.kept, r.removed, r.coverage);
        }
        s
    }
}

pub fn format_percent(p: f64) -> String {
    format!("{p:.3}%")
}

pub fn coverage_report(report: &FilterReport) -> CoverageSummary {
    let row = |label, kept: usize, removed: usize| CoverageRow {
        label,
        total: kept + removed,
        kept,
        removed,
        coverage: format_percent(percent(kept, kept + removed)),
    };
    CoverageSummary {
        format_version: FORMAT_VERSION,
        threshold: report.threshold,
        classes: report
            .classes
            .iter()
            .map(|c| row(Some(c.label), c.kept.len(), c.removed.len()))
            .collect(),
        overall: row(None, report.kept_total, report.total - report.kept_total),
    }
}
