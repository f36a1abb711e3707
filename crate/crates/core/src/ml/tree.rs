//! Binary decision trees over threshold splits.
//!
//! A split sends `x[feature] <= threshold` left. Candidate thresholds are the
//! midpoints between consecutive distinct values observed at the node, and the
//! split maximizing information gain `H(D) - sum |D_j|/|D| H(D_j)` wins. Gains
//! within [`GAIN_TIE_TOLERANCE`] of each other count as equal; the earlier
//! candidate (lower feature, then lower threshold) is kept.
//!
//! An impure node is split even when the best gain is zero, so that
//! interactions invisible to any single feature (XOR) can still be resolved
//! one level further down. Growth stops at pure nodes, at the depth limit,
//! below `min_samples_split`, or when every feature is constant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::relevance::gini::{gini_from_counts, impurity_decrease, ImpurityRecord};
use crate::topical::SparseVector;

pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    /// Information gain in bits.
    #[default]
    Entropy,
    Gini,
}

/// Features examined per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    #[default]
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Count(m) => m,
        };
        m.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub criterion: SplitCriterion,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            criterion: SplitCriterion::Entropy,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        label: Label,
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
        counts: [usize; 2],
        impurity: ImpurityRecord,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

/// Entropy in bits of a class-count vector.
pub fn entropy_bits(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn node_impurity(criterion: SplitCriterion, counts: [usize; 2]) -> f64 {
    match criterion {
        SplitCriterion::Entropy => entropy_bits(&counts),
        SplitCriterion::Gini => gini_from_counts(&counts),
    }
}

/// Gain of splitting `parent` into `left` and `parent - left`.
pub fn split_gain(criterion: SplitCriterion, parent: [usize; 2], left: [usize; 2]) -> f64 {
    let right = [parent[0] - left[0], parent[1] - left[1]];
    let n = (parent[0] + parent[1]) as f64;
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    node_impurity(criterion, parent)
        - nl / n * node_impurity(criterion, left)
        - nr / n * node_impurity(criterion, right)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    left_counts: [usize; 2],
}

struct Builder<'a> {
    rows: &'a [SparseVector],
    labels: &'a [Label],
    n_features: usize,
    params: &'a TreeParams,
    /// Present when features are subsampled per node.
    sampler: Option<(&'a mut ChaCha8Rng, Vec<usize>)>,
}

impl DecisionTree {
    pub fn fit(data: &FeatureMatrix, params: &TreeParams) -> Result<Self> {
        data.require_non_empty()?;
        let samples = (0..data.len()).collect();
        Self::fit_samples(&data.rows, &data.labels, data.n_features(), samples, params, None)
    }

    /// Grows a tree on `samples` (indices into `rows`, repeats allowed).
    /// `rng` is only consulted when `params.max_features` is below the
    /// feature count.
    pub(crate) fn fit_samples(
        rows: &[SparseVector],
        labels: &[Label],
        n_features: usize,
        samples: Vec<usize>,
        params: &TreeParams,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFewInstances { needed: 1, got: 0 });
        }
        if params.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter("min_samples_leaf must be at least 1".into()));
        }
        let subsample = params.max_features.resolve(n_features) < n_features;
        let sampler = match (subsample, rng) {
            (true, Some(rng)) => Some((rng, (0..n_features).collect())),
            (true, None) => {
                return Err(Error::InvalidParameter(
                    "feature subsampling needs a random generator".into(),
                ))
            }
            (false, _) => None,
        };
        let mut builder = Builder {
            rows,
            labels,
            n_features,
            params,
            sampler,
        };
        Ok(DecisionTree {
            nodes: builder.grow(samples),
            n_features,
        })
    }

    pub fn predict(&self, row: &SparseVector) -> Label {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { label, .. } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if row.get(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    /// `(feature, threshold, gain)` of the root, if it splits.
    pub fn root_split(&self) -> Option<(usize, f64, f64)> {
        match &self.nodes[0] {
            Node::Split {
                feature,
                threshold,
                gain,
                ..
            } => Some((*feature, *threshold, *gain)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn impurity_records(&self) -> impl Iterator<Item = &ImpurityRecord> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { impurity, .. } => Some(impurity),
            Node::Leaf { .. } => None,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            best = best.max(d);
            if let Node::Split { left, right, .. } = &self.nodes[id] {
                stack.push((*left, d + 1));
                stack.push((*right, d + 1));
            }
        }
        best
    }
}

impl Builder<'_> {
    fn counts(&self, samples: &[usize]) -> [usize; 2] {
        let mut c = [0; 2];
        for &s in samples {
            c[self.labels[s].index()] += 1;
        }
        c
    }

    fn grow(&mut self, root_samples: Vec<usize>) -> Vec<Node> {
        let placeholder = Node::Leaf {
            label: Label::ZeroPublications,
            counts: [0; 2],
        };
        let mut nodes = vec![placeholder.clone()];
        // (node id, samples, depth, label to use on a count tie)
        let mut stack = vec![(0usize, root_samples, 0usize, Label::ZeroPublications)];
        while let Some((id, samples, depth, tie_label)) = stack.pop() {
            let counts = self.counts(&samples);
            let label = match counts[1].cmp(&counts[0]) {
                std::cmp::Ordering::Greater => Label::Productive,
                std::cmp::Ordering::Less => Label::ZeroPublications,
                std::cmp::Ordering::Equal => tie_label,
            };
            let stop = counts[0] == 0
                || counts[1] == 0
                || samples.len() < self.params.min_samples_split
                || self.params.max_depth.is_some_and(|d| depth >= d);
            let split = if stop { None } else { self.best_split(&samples, counts) };
            let Some(c) = split else {
                nodes[id] = Node::Leaf { label, counts };
                continue;
            };

            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&s| self.rows[s].get(c.feature) <= c.threshold);
            let right_counts = [counts[0] - c.left_counts[0], counts[1] - c.left_counts[1]];
            let g_before = gini_from_counts(&counts);
            let g_left = gini_from_counts(&c.left_counts);
            let g_right = gini_from_counts(&right_counts);
            let delta_g = impurity_decrease(g_before, g_left, g_right, left.len(), right.len())
                .expect("both children are non-empty");
            let left_id = nodes.len();
            let right_id = left_id + 1;
            nodes.push(placeholder.clone());
            nodes.push(placeholder.clone());
            nodes[id] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                gain: c.gain,
                left: left_id,
                right: right_id,
                counts,
                impurity: ImpurityRecord {
                    node_id: id,
                    feature: c.feature,
                    g_before,
                    g_left,
                    g_right,
                    n_left: left.len(),
                    n_right: right.len(),
                    delta_g,
                },
            };
            stack.push((right_id, right, depth + 1, label));
            stack.push((left_id, left, depth + 1, label));
        }
        nodes
    }

    fn best_split(&mut self, samples: &[usize], counts: [usize; 2]) -> Option<Candidate> {
        // (feature, value, label) for every stored entry at this node.
        let mut entries: Vec<(usize, f64, usize)> = Vec::new();
        for &s in samples {
            let label = self.labels[s].index();
            for &(j, v) in &self.rows[s].pairs {
                // `+ 0.0` folds -0.0 into 0.0.
                entries.push((j, v + 0.0, label));
            }
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut ranges: Vec<(usize, usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=entries.len() {
            if i == entries.len() || entries[i].0 != entries[start].0 {
                if start < i {
                    ranges.push((entries[start].0, start, i));
                }
                start = i;
            }
        }
        let lookup = |j: usize| {
            ranges
                .binary_search_by_key(&j, |r| r.0)
                .ok()
                .map(|pos| &entries[ranges[pos].1..ranges[pos].2])
        };

        let m = self.params.max_features.resolve(self.n_features);
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        while visited < self.n_features {
            let j = match &mut self.sampler {
                None => visited,
                Some((rng, perm)) => {
                    let k = rng.gen_range(visited..perm.len());
                    perm.swap(visited, k);
                    perm[visited]
                }
            };
            visited += 1;
            let stored = lookup(j).unwrap_or(&[]);
            if let Some(c) = self.best_threshold(j, stored, samples.len(), counts) {
                if best.is_none_or(|b| c.gain > b.gain + GAIN_TIE_TOLERANCE) {
                    best = Some(c);
                }
            }
            if self.sampler.is_some() && visited >= m && best.is_some() {
                break;
            }
        }
        best
    }

    /// Best threshold on one feature. `stored` holds the node's explicit
    /// entries sorted by value; rows without an entry are zeros.
    fn best_threshold(
        &self,
        feature: usize,
        stored: &[(usize, f64, usize)],
        n: usize,
        counts: [usize; 2],
    ) -> Option<Candidate> {
        let mut stored_counts = [0; 2];
        for e in stored {
            stored_counts[e.2] += 1;
        }
        let implicit = [counts[0] - stored_counts[0], counts[1] - stored_counts[1]];

        // Distinct values with their class counts, implicit zeros merged in.
        let mut groups: Vec<(f64, [usize; 2])> = Vec::new();
        let mut zeros_done = implicit == [0, 0];
        for e in stored {
            if !zeros_done && e.1 >= 0.0 {
                push_group(&mut groups, 0.0, implicit);
                zeros_done = true;
            }
            let mut c = [0; 2];
            c[e.2] = 1;
            push_group(&mut groups, e.1, c);
        }
        if !zeros_done {
            push_group(&mut groups, 0.0, implicit);
        }
        if groups.len() < 2 {
            return None;
        }

        let min_leaf = self.params.min_samples_leaf;
        let mut left = [0; 2];
        let mut best: Option<Candidate> = None;
        for w in groups.windows(2) {
            left[0] += w[0].1[0];
            left[1] += w[0].1[1];
            let nl = left[0] + left[1];
            if nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let gain = split_gain(self.params.criterion, counts, left);
            if best.is_none_or(|b| gain > b.gain + GAIN_TIE_TOLERANCE) {
                best = Some(Candidate {
                    feature,
                    threshold: midpoint(w[0].0, w[1].0),
                    gain,
                    left_counts: left,
                });
            }
        }
        best
    }
}

fn push_group(groups: &mut Vec<(f64, [usize; 2])>, v: f64, c: [usize; 2]) {
    match groups.last_mut() {
        Some(last) if last.0 == v => {
            last.1[0] += c[0];
            last.1[1] += c[1];
        }
        _ => groups.push((v, c)),
    }
}

/// Midpoint of `a < b` that stays strictly below `b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a / 2.0 + b / 2.0;
    if m >= b || m < a {
        a
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[Vec<f64>], labels: &[u8]) -> FeatureMatrix {
        let labels: Vec<Label> = labels.iter().map(|&l| Label::from_index(l as usize)).collect();
        FeatureMatrix::from_dense(rows, &labels).unwrap()
    }

    #[test]
    fn perfect_split_has_one_bit_of_gain() {
        let rows: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..16).map(|i| (i >= 8) as u8).collect();
        let t = DecisionTree::fit(&matrix(&rows, &labels), &TreeParams::default()).unwrap();
        let (f, thr, gain) = t.root_split().unwrap();
        assert_eq!((f, thr), (0, 7.5));
        assert!((gain - 1.0).abs() < 1e-15);
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.n_leaves(), 2);
    }

    #[test]
    fn constant_features_give_a_majority_leaf() {
        let rows = vec![vec![1.0, 0.0]; 5];
        let t = DecisionTree::fit(&matrix(&rows, &[1, 1, 0, 1, 0]), &TreeParams::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&SparseVector::new()), Label::Productive);
    }

    #[test]
    fn single_class_is_a_leaf() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let t = DecisionTree::fit(&matrix(&rows, &[0, 0, 0, 0]), &TreeParams::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn xor_resolves_at_depth_two() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let m = matrix(&rows, &[0, 1, 1, 0]);
        // Brute force: each feature alone leaves (1,1) on both sides, H = 1.
        for j in 0..2 {
            let left = [1, 1];
            assert_eq!(split_gain(SplitCriterion::Entropy, [2, 2], left), 0.0, "feature {j}");
        }
        let t = DecisionTree::fit(&m, &TreeParams::default()).unwrap();
        assert_eq!(t.root_split().unwrap().2, 0.0);
        assert_eq!(t.depth(), 2);
        for (row, label) in m.rows.iter().zip(&m.labels) {
            assert_eq!(t.predict(row), *label);
        }
    }

    #[test]
    fn sparse_rows_match_dense_rows() {
        let dense = vec![vec![0.0, 2.0], vec![1.0, 0.0], vec![3.0, 0.0], vec![0.0, -1.0]];
        let labels = [Label::Productive, Label::ZeroPublications, Label::ZeroPublications, Label::Productive];
        let d = FeatureMatrix::from_dense(&dense, &labels).unwrap();
        let mut s = d.clone();
        s.rows = dense.iter().map(|r| SparseVector::from_pairs(r.iter().copied().enumerate().collect())).collect();
        let td = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        let ts = DecisionTree::fit(&s, &TreeParams::default()).unwrap();
        assert_eq!(td.nodes, ts.nodes);
    }

    #[test]
    fn depth_limit() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let p = TreeParams {
            max_depth: Some(1),
            ..TreeParams::default()
        };
        let t = DecisionTree::fit(&matrix(&rows, &[0, 1, 0, 1, 0, 1, 0, 1]), &p).unwrap();
        assert!(t.depth() <= 1);
    }

    #[test]
    fn records_replay() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i % 5) as f64, (i % 3) as f64]).collect();
        let labels: Vec<u8> = (0..12).map(|i| (i % 2) as u8).collect();
        let t = DecisionTree::fit(&matrix(&rows, &labels), &TreeParams::default()).unwrap();
        for r in t.impurity_records() {
            let d = impurity_decrease(r.g_before, r.g_left, r.g_right, r.n_left, r.n_right).unwrap();
            assert!((d - r.delta_g).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoint_stays_between() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert!(midpoint(a, b) < b);
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(18), 4);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
        assert_eq!(MaxFeatures::Count(50).resolve(7), 7);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
    }
}
