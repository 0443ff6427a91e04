//! Random forest of information-gain decision trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training_data, ModelParams, TrainedModel};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMeasure {
    InformationGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    /// `ceil(sqrt(feature_count))`
    Sqrt,
    All,
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
            MaxFeatures::All => d.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_trees: usize,
    pub split_measure: SplitMeasure,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestHyper {
    fn default() -> Self {
        ForestHyper {
            n_trees: 50,
            split_measure: SplitMeasure::InformationGain,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: Label,
    },
    /// Rows with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes stored in an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(label: Label) -> Tree {
        Tree {
            nodes: vec![TreeNode::Leaf { label }],
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Predicts from a sparse row given as sorted `(indices, values)`.
    pub fn predict_row(&self, idx: &[usize], vals: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let v = idx.binary_search(feature).map(|k| vals[k]).unwrap_or(0.0);
                    at = if v <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// Weighted class totals: `[useful, not_useful]`.
type Counts = [f64; 2];

fn class_slot(label: Label) -> usize {
    match label {
        Label::Useful => 0,
        Label::NotUseful => 1,
    }
}

fn entropy(c: Counts) -> f64 {
    let total = c[0] + c[1];
    if total <= 0.0 {
        return 0.0;
    }
    c.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            -p * p.log2()
        })
        .sum()
}

fn majority(c: Counts) -> Label {
    if c[0] > c[1] {
        Label::Useful
    } else {
        Label::NotUseful
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Midpoint strictly below `hi` so that `lo <= t < hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Best threshold for one feature. `entries` holds the node's non-zero values as
/// `(value, class slot, weight)`; every other node sample has value 0.
fn best_threshold(entries: &mut [(f64, usize, f64)], node: Counts) -> Option<(f64, f64)> {
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut zeros = node;
    for &(_, slot, w) in entries.iter() {
        zeros[slot] -= w;
    }
    // Merge the implicit zero bucket into the sorted value list.
    let mut points: Vec<(f64, Counts)> = Vec::with_capacity(entries.len() + 1);
    let mut zero_added = zeros[0] + zeros[1] <= 0.0;
    for &(v, slot, w) in entries.iter() {
        if !zero_added && v > 0.0 {
            points.push((0.0, zeros));
            zero_added = true;
        }
        match points.last_mut() {
            Some((last, c)) if *last == v => c[slot] += w,
            _ => {
                let mut c = [0.0; 2];
                c[slot] = w;
                points.push((v, c));
            }
        }
    }
    if !zero_added {
        points.push((0.0, zeros));
    }
    if points.len() < 2 {
        return None;
    }
    let parent = entropy(node);
    let total = node[0] + node[1];
    let mut left = [0.0; 2];
    let mut best: Option<(f64, f64)> = None;
    for k in 0..points.len() - 1 {
        left[0] += points[k].1[0];
        left[1] += points[k].1[1];
        let right = [node[0] - left[0], node[1] - left[1]];
        let wl = left[0] + left[1];
        let gain = parent - (wl / total) * entropy(left) - ((total - wl) / total) * entropy(right);
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((midpoint(points[k].0, points[k + 1].0), gain));
        }
    }
    best
}

type Entry = (f64, usize, f64);

struct Grower<'a> {
    x: &'a CsrMatrix,
    columns: &'a [Vec<(usize, f64)>],
    y: &'a [Label],
    weights: Vec<f64>,
    max_features: usize,
    min_samples_split: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
    /// Per-row and per-feature stamps of the node currently being split.
    row_stamp: Vec<u32>,
    feature_stamp: Vec<u32>,
    stamp: u32,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> Counts {
        let mut c = [0.0; 2];
        for &r in rows {
            c[class_slot(self.y[r])] += self.weights[r];
        }
        c
    }

    /// Features with at least one non-zero value in the node, in first-seen order.
    fn present_features(&mut self, rows: &[usize]) -> Vec<usize> {
        self.stamp += 1;
        let mut present = Vec::new();
        for &r in rows {
            self.row_stamp[r] = self.stamp;
            for &c in self.x.row(r).0 {
                if self.feature_stamp[c] != self.stamp {
                    self.feature_stamp[c] = self.stamp;
                    present.push(c);
                }
            }
        }
        present
    }

    /// Non-zero node entries of `feature`, gathered from whichever of the column
    /// or the node's rows is shorter.
    fn gather(&self, rows: &[usize], feature: usize) -> Vec<Entry> {
        let column = &self.columns[feature];
        let entry = |r: usize, v: f64| (v, class_slot(self.y[r]), self.weights[r]);
        if column.len() <= rows.len() * 8 {
            column
                .iter()
                .filter(|(r, _)| self.row_stamp[*r] == self.stamp)
                .map(|&(r, v)| entry(r, v))
                .collect()
        } else {
            rows.iter()
                .filter_map(|&r| {
                    let (idx, vals) = self.x.row(r);
                    idx.binary_search(&feature).ok().map(|k| entry(r, vals[k]))
                })
                .collect()
        }
    }

    fn grow(&mut self, rows: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&rows);
        self.nodes.push(TreeNode::Leaf {
            label: majority(counts),
        });
        let samples: f64 = counts[0] + counts[1];
        if counts[0] == 0.0 || counts[1] == 0.0 || samples < self.min_samples_split as f64 {
            return id;
        }

        let mut candidates = self.present_features(&rows);
        candidates.shuffle(&mut self.rng);
        let split = best_split_among(&candidates, counts, self.max_features, |f| self.gather(&rows, f));
        let Some(split) = split else {
            return id;
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x.get(r, split.feature) <= split.threshold);
        let left = self.grow(left_rows);
        let right = self.grow(right_rows);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            gain: split.gain,
            left,
            right,
        };
        id
    }
}

/// Examines `candidates` in order, skipping features constant within the node,
/// until `max_features` non-constant ones have been scored. Ties keep the
/// earlier candidate. `gather(f)` returns the node's non-zero entries of `f`.
pub(crate) fn best_split_among(
    candidates: &[usize],
    node: Counts,
    max_features: usize,
    mut gather: impl FnMut(usize) -> Vec<Entry>,
) -> Option<Split> {
    let mut best: Option<Split> = None;
    let mut examined = 0;
    for &f in candidates {
        if examined >= max_features {
            break;
        }
        let mut entries = gather(f);
        if let Some((threshold, gain)) = best_threshold(&mut entries, node) {
            examined += 1;
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn grow_tree(x: &CsrMatrix, columns: &[Vec<(usize, f64)>], y: &[Label], h: &ForestHyper, tree_index: usize) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed.wrapping_add(tree_index as u64));
    let n = x.rows();
    let mut weights = vec![0.0; n];
    if h.bootstrap {
        for _ in 0..n {
            weights[rng.gen_range(0..n)] += 1.0;
        }
    } else {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    let rows: Vec<usize> = (0..n).filter(|&r| weights[r] > 0.0).collect();
    let mut grower = Grower {
        x,
        columns,
        y,
        weights,
        max_features: h.max_features.resolve(x.cols()),
        min_samples_split: h.min_samples_split,
        rng,
        nodes: Vec::new(),
        row_stamp: vec![0; n],
        feature_stamp: vec![0; x.cols()],
        stamp: 0,
    };
    grower.grow(rows);
    Tree { nodes: grower.nodes }
}

/// Trees are grown in parallel; tree `t` draws from its own stream seeded with
/// `seed + t`, so results do not depend on the thread count.
pub fn train_random_forest(x: &CsrMatrix, y: &[Label], h: &ForestHyper) -> Result<TrainedModel> {
    check_training_data(x, y)?;
    if h.n_trees == 0 {
        return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
    }
    let columns = x.to_columns();
    let trees: Vec<Tree> = (0..h.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(x, &columns, y, h, t))
        .collect();
    Ok(TrainedModel::new(
        x.cols(),
        ModelParams::RandomForest {
            hyper: h.clone(),
            trees,
        },
    ))
}
