use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, MaxFeatures, TreeParams};
use super::FeatureMatrix;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, Stream};
use crate::topical::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            max_depth: None,
            min_samples_leaf: 1,
        }
    }
}

/// Bagged trees with per-node feature subsampling. Tree `t` draws its
/// bootstrap sample and feature orders from `derive_seed(seed, Bootstrap, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(data: &FeatureMatrix, params: &ForestParams, seed: u64) -> Result<Self> {
        data.require_non_empty()?;
        if params.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: params.max_features,
            ..TreeParams::default()
        };
        let n = data.len();
        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(seed, Stream::Bootstrap, t as u64));
                let samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_samples(
                    &data.rows,
                    &data.labels,
                    data.n_features(),
                    samples,
                    &tree_params,
                    Some(&mut rng),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RandomForest { trees })
    }

    /// Votes per class, indexed by [`Label::index`].
    pub fn votes(&self, row: &SparseVector) -> [usize; 2] {
        let mut v = [0; 2];
        for t in &self.trees {
            v[t.predict(row).index()] += 1;
        }
        v
    }

    /// Majority vote; a tied vote takes the first tree's answer.
    pub fn predict(&self, row: &SparseVector) -> Label {
        let v = self.votes(row);
        match v[1].cmp(&v[0]) {
            std::cmp::Ordering::Greater => Label::Productive,
            std::cmp::Ordering::Less => Label::ZeroPublications,
            std::cmp::Ordering::Equal => self.trees[0].predict(row),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 7) as f64, (i * 3 % 11) as f64, (i / 20) as f64 + 0.1 * (i % 3) as f64])
            .collect();
        let labels: Vec<Label> = (0..40).map(|i| Label::from_index(usize::from(i >= 20))).collect();
        FeatureMatrix::from_dense(&rows, &labels).unwrap()
    }

    #[test]
    fn degenerate_forest_is_a_tree() {
        let d = data();
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: MaxFeatures::All,
            ..ForestParams::default()
        };
        let f = RandomForest::fit(&d, &p, 9).unwrap();
        let t = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        assert_eq!(f.trees[0], t);
    }

    #[test]
    fn separable_training_accuracy() {
        let d = data();
        let f = RandomForest::fit(&d, &ForestParams::default(), 1).unwrap();
        for (r, l) in d.rows.iter().zip(&d.labels) {
            assert_eq!(f.predict(r), *l);
        }
    }

    #[test]
    fn deterministic_votes() {
        let d = data();
        let a = RandomForest::fit(&d, &ForestParams::default(), 5).unwrap();
        let b = RandomForest::fit(&d, &ForestParams::default(), 5).unwrap();
        let probe = SparseVector::from_dense(&[3.0, 4.0, 0.6]);
        assert_eq!(a.votes(&probe), b.votes(&probe));
        assert_eq!(a, b);
        let c = RandomForest::fit(&d, &ForestParams::default(), 6).unwrap();
        assert_ne!(a, c);
    }
}
