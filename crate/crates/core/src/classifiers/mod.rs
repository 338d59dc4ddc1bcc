//! Downstream classifiers over embedding vectors, and the inlier/outlier
//! evaluation used to compare filtered against unfiltered training.

mod eval;
mod knn;
mod lda;
mod logreg;
mod tree;

use serde::{Deserialize, Serialize};

pub use eval::{accuracy, evaluate_split, weighted_accuracy, EvalResult};
pub use knn::{fit_knn, Knn};
pub use lda::{fit_lda, Lda};
pub use logreg::{fit_logistic_regression, LogisticRegression};
pub use tree::{fit_decision_tree, DecisionTree, TreeNode};

use crate::error::{Error, Result};
use crate::numeric::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    Knn,
    LogisticRegression,
    Lda,
}

impl ClassifierKind {
    /// Column order of the accuracy table.
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::Knn,
        ClassifierKind::LogisticRegression,
        ClassifierKind::Lda,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Self::DecisionTree => "Decision Tree",
            Self::Knn => "KNN",
            Self::LogisticRegression => "Logistic Regression",
            Self::Lda => "LDA",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Self::DecisionTree => "tree",
            Self::Knn => "knn",
            Self::LogisticRegression => "logreg",
            Self::Lda => "lda",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tree" | "decision_tree" | "dt" => Ok(Self::DecisionTree),
            "knn" => Ok(Self::Knn),
            "logreg" | "logistic_regression" | "lr" => Ok(Self::LogisticRegression),
            "lda" => Ok(Self::Lda),
            other => Err(Error::Config(format!(
                "unknown classifier {other:?} (expected tree, knn, logreg or lda)"
            ))),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub knn_k: usize,
    pub logreg_epochs: usize,
    pub logreg_lr: f64,
    pub lda_ridge: Option<f64>,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            knn_k: 5,
            logreg_epochs: 500,
            logreg_lr: 0.1,
            lda_ridge: None,
            tree_max_depth: 8,
            tree_min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedClassifier {
    Knn(Knn),
    LogisticRegression(LogisticRegression),
    Lda(Lda),
    DecisionTree(DecisionTree),
}

impl TrainedClassifier {
    pub fn fit(
        kind: ClassifierKind,
        vectors: &[Vec<f64>],
        labels: &[u32],
        params: &ClassifierParams,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::Knn => Self::Knn(fit_knn(vectors, labels, params.knn_k.min(vectors.len()).max(1))?),
            ClassifierKind::LogisticRegression => Self::LogisticRegression(fit_logistic_regression(
                vectors,
                labels,
                params.logreg_epochs,
                params.logreg_lr,
                rng,
            )?),
            ClassifierKind::Lda => Self::Lda(fit_lda(vectors, labels, params.lda_ridge)?),
            ClassifierKind::DecisionTree => Self::DecisionTree(fit_decision_tree(
                vectors,
                labels,
                params.tree_max_depth,
                params.tree_min_leaf,
            )?),
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::Knn(_) => ClassifierKind::Knn,
            Self::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Self::Lda(_) => ClassifierKind::Lda,
            Self::DecisionTree(_) => ClassifierKind::DecisionTree,
        }
    }

    pub fn predict_one(&self, x: &[f64]) -> u32 {
        match self {
            Self::Knn(m) => m.predict_one(x),
            Self::LogisticRegression(m) => m.predict_one(x),
            Self::Lda(m) => m.predict_one(x),
            Self::DecisionTree(m) => m.predict_one(x),
        }
    }

    pub fn predict(&self, vectors: &[Vec<f64>]) -> Vec<u32> {
        vectors.iter().map(|x| self.predict_one(x)).collect()
    }
}

pub(crate) fn check_training(vectors: &[Vec<f64>], labels: &[u32]) -> Result<()> {
    if vectors.is_empty() {
        return Err(Error::contract("empty training set"));
    }
    if vectors.len() != labels.len() {
        return Err(Error::shape("labels", vectors.len(), labels.len()));
    }
    let dim = vectors[0].len();
    if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != dim) {
        return Err(Error::shape(format!("training vector {i}"), dim, v.len()));
    }
    Ok(())
}

/// Sorted distinct labels and each sample's index into them.
pub(crate) fn class_index(labels: &[u32]) -> (Vec<u32>, Vec<usize>) {
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let y = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    (classes, y)
}

/// Highest score wins; ties go to the smallest label.
pub(crate) fn argmax_label(classes: &[u32], scores: &[f64]) -> u32 {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    classes[best]
}

/// Most frequent label; ties go to the smallest label.
pub(crate) fn majority(labels: impl Iterator<Item = u32>) -> u32 {
    let mut counts = std::collections::BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .fold((u32::MAX, 0usize), |(bl, bc), (l, c)| if c > bc { (l, c) } else { (bl, bc) })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_breaks() {
        assert_eq!(argmax_label(&[3, 5, 9], &[1.0, 2.0, 2.0]), 5);
        assert_eq!(majority([4, 2, 4, 2].into_iter()), 2);
        assert_eq!(majority([7].into_iter()), 7);
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("KNN".parse::<ClassifierKind>().unwrap(), ClassifierKind::Knn);
        assert_eq!("logreg".parse::<ClassifierKind>().unwrap(), ClassifierKind::LogisticRegression);
        assert!("svm".parse::<ClassifierKind>().is_err());
    }
}
