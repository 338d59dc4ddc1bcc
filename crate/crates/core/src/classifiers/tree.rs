use serde::{Deserialize, Serialize};

use super::{check_training, class_index};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: u32,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Taken when `x[feature] <= threshold`.
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub max_depth: usize,
    pub min_leaf: usize,
}

/// CART with Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct feature values; equal gains prefer the lower feature
/// index, then the lower threshold.
pub fn fit_decision_tree(vectors: &[Vec<f64>], labels: &[u32], max_depth: usize, min_leaf: usize) -> Result<DecisionTree> {
    check_training(vectors, labels)?;
    if max_depth == 0 {
        return Err(Error::contract("max_depth must be at least 1"));
    }
    let (classes, y) = class_index(labels);
    let ctx = Ctx {
        x: vectors,
        y: &y,
        classes: &classes,
        min_leaf: min_leaf.max(1),
    };
    let idx: Vec<usize> = (0..vectors.len()).collect();
    Ok(DecisionTree {
        root: ctx.grow(idx, max_depth),
        max_depth,
        min_leaf: min_leaf.max(1),
    })
}

struct Ctx<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    classes: &'a [u32],
    min_leaf: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

impl Ctx<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    fn leaf(&self, counts: &[usize]) -> TreeNode {
        // first maximum in sorted label order = smallest label among ties
        let best = counts
            .iter()
            .enumerate()
            .fold(0, |b, (i, &c)| if c > counts[b] { i } else { b });
        TreeNode::Leaf {
            label: self.classes[best],
        }
    }

    fn grow(&self, idx: Vec<usize>, depth_left: usize) -> TreeNode {
        let counts = self.counts(&idx);
        let n = idx.len();
        let parent = gini(&counts, n);
        if depth_left == 0 || parent == 0.0 || n < 2 * self.min_leaf {
            return self.leaf(&counts);
        }
        match self.best_split(&idx, &counts, parent) {
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][feature] <= threshold);
                TreeNode::Split {
                    feature,
                    threshold,
                    left: Box::new(self.grow(l, depth_left - 1)),
                    right: Box::new(self.grow(r, depth_left - 1)),
                }
            }
            None => self.leaf(&counts),
        }
    }

    fn best_split(&self, idx: &[usize], counts: &[usize], parent: f64) -> Option<(usize, f64)> {
        let n = idx.len();
        let dim = self.x[idx[0]].len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..dim {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; counts.len()];
            for pos in 0..n - 1 {
                left[self.y[order[pos]]] += 1;
                let (lo, hi) = (self.x[order[pos]][f], self.x[order[pos + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = pos + 1;
                let nr = n - nl;
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let weighted = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                let gain = parent - weighted;
                let threshold = lo + (hi - lo) / 2.0;
                // strict comparison keeps the earliest (feature, threshold)
                if gain > 1e-12 && best.map_or(true, |(g, _, _)| gain > g + 1e-15) {
                    best = Some((gain, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl DecisionTree {
    pub fn predict_one(&self, x: &[f64]) -> u32 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }
}
