//! Classifiers and the evaluation protocol.
//!
//! Every trainer takes a [`FeatureMatrix`] without missing values and returns
//! an immutable [`TrainedModel`]. Models that need standardized inputs carry
//! their own [`preprocess::Standardizer`], fitted on the training rows only.

pub mod bayes;
pub mod cv;
pub mod forest;
pub mod knn;
pub mod metrics;
pub mod mlp;
pub mod preprocess;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::topical::SparseVector;

pub use bayes::{Likelihood, NaiveBayes, NbParams};
pub use cv::{
    cross_validate, cross_validate_prepared, prepare, ComplexityText, CvSettings, EvalConfig,
    EvalReport, FeatureConfig, FeatureFamily, PreparedCorpus, VocabularyScope,
};
pub use forest::{ForestParams, RandomForest};
pub use knn::{knn_predict, Knn, KnnParams, Metric, K_GRID};
pub use metrics::{f1_score, macro_f1, significance_pvalue, Confusion};
pub use mlp::{Mlp, MlpParams, Network};
pub use svm::{LinearSvm, SvmParams};
pub use tree::{DecisionTree, MaxFeatures, Node, SplitCriterion, TreeParams};

/// Rows of one feature space with a label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<SparseVector>,
    pub labels: Vec<Label>,
    pub feature_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        ids: Vec<String>,
        rows: Vec<SparseVector>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        if labels.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: rows.len(),
            });
        }
        let dim = feature_names.len();
        if let Some(i) = rows.iter().position(|r| !r.is_well_formed(dim)) {
            return Err(Error::SchemaMismatch(format!(
                "row {i} has unsorted, out-of-range or non-finite entries for {dim} features"
            )));
        }
        Ok(FeatureMatrix {
            ids,
            rows,
            labels,
            feature_names,
        })
    }

    /// Dense rows with generated ids (`r0`, `r1`, ...) and names (`f0`, ...).
    pub fn from_dense(rows: &[Vec<f64>], labels: &[Label]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: dim,
            });
        }
        FeatureMatrix::new(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
            labels.to_vec(),
            (0..dim).map(|j| format!("f{j}")).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::TooFewInstances { needed: 1, got: 0 })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dtree,
    RandomForest,
    Knn,
    NaiveBayes,
    LinearSvm,
    Mlp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Dtree,
        Algorithm::RandomForest,
        Algorithm::Knn,
        Algorithm::NaiveBayes,
        Algorithm::LinearSvm,
        Algorithm::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dtree => "dtree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::Knn => "knn",
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::LinearSvm => "linear_svm",
            Algorithm::Mlp => "mlp",
        }
    }

    /// Defaults suited to a feature family: dense complexity features are
    /// standardized and use euclidean/gaussian variants, sparse tf-idf rows
    /// use cosine/multinomial ones.
    pub fn default_hyperparameters(self, family: FeatureFamily) -> Hyperparameters {
        let dense = family == FeatureFamily::Complexity;
        match self {
            Algorithm::Dtree => Hyperparameters::Dtree(TreeParams::default()),
            Algorithm::RandomForest => Hyperparameters::RandomForest(ForestParams::default()),
            Algorithm::Knn => Hyperparameters::Knn(KnnParams {
                k: None,
                metric: if dense { Metric::Euclidean } else { Metric::Cosine },
                standardize: dense,
            }),
            Algorithm::NaiveBayes => Hyperparameters::NaiveBayes(NbParams {
                likelihood: if dense {
                    Likelihood::Gaussian
                } else {
                    Likelihood::Multinomial
                },
                ..NbParams::default()
            }),
            Algorithm::LinearSvm => Hyperparameters::LinearSvm(SvmParams {
                standardize: dense,
                ..SvmParams::default()
            }),
            Algorithm::Mlp => Hyperparameters::Mlp(MlpParams::default()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Hyperparameters {
    Dtree(TreeParams),
    RandomForest(ForestParams),
    Knn(KnnParams),
    NaiveBayes(NbParams),
    LinearSvm(SvmParams),
    Mlp(MlpParams),
}

impl Hyperparameters {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Hyperparameters::Dtree(_) => Algorithm::Dtree,
            Hyperparameters::RandomForest(_) => Algorithm::RandomForest,
            Hyperparameters::Knn(_) => Algorithm::Knn,
            Hyperparameters::NaiveBayes(_) => Algorithm::NaiveBayes,
            Hyperparameters::LinearSvm(_) => Algorithm::LinearSvm,
            Hyperparameters::Mlp(_) => Algorithm::Mlp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Tree(DecisionTree),
    Forest(RandomForest),
    Knn(Knn),
    NaiveBayes(NaiveBayes),
    Svm(LinearSvm),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub hyperparameters: Hyperparameters,
    pub model: Model,
    pub n_features: usize,
    /// Hex SHA-256 over the training rows, labels, hyperparameters and seed.
    pub fingerprint: String,
}

impl TrainedModel {
    pub fn predict(&self, row: &SparseVector) -> Label {
        match &self.model {
            Model::Tree(m) => m.predict(row),
            Model::Forest(m) => m.predict(row),
            Model::Knn(m) => m.predict(row),
            Model::NaiveBayes(m) => m.predict(row),
            Model::Svm(m) => m.predict(row),
            Model::Mlp(m) => m.predict(row),
        }
    }

    pub fn predict_matrix(&self, data: &FeatureMatrix) -> Vec<Label> {
        data.rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// Trains the model described by `hyper`; `seed` drives every random choice.
pub fn train(data: &FeatureMatrix, hyper: &Hyperparameters, seed: u64) -> Result<TrainedModel> {
    data.require_non_empty()?;
    let model = match hyper {
        Hyperparameters::Dtree(p) => Model::Tree(DecisionTree::fit(data, p)?),
        Hyperparameters::RandomForest(p) => Model::Forest(RandomForest::fit(data, p, seed)?),
        Hyperparameters::Knn(p) => Model::Knn(Knn::fit(data, p, seed)?),
        Hyperparameters::NaiveBayes(p) => Model::NaiveBayes(NaiveBayes::fit(data, p)?),
        Hyperparameters::LinearSvm(p) => Model::Svm(LinearSvm::fit(data, p, seed)?),
        Hyperparameters::Mlp(p) => Model::Mlp(Mlp::fit(data, p, seed)?),
    };
    Ok(TrainedModel {
        algorithm: hyper.algorithm(),
        hyperparameters: hyper.clone(),
        model,
        n_features: data.n_features(),
        fingerprint: fingerprint(data, hyper, seed),
    })
}

pub fn train_decision_tree(data: &FeatureMatrix, hyper: &TreeParams) -> Result<TrainedModel> {
    train(data, &Hyperparameters::Dtree(hyper.clone()), 0)
}

pub fn train_random_forest(
    data: &FeatureMatrix,
    hyper: &ForestParams,
    seed: u64,
) -> Result<TrainedModel> {
    train(data, &Hyperparameters::RandomForest(hyper.clone()), seed)
}

pub fn train_naive_bayes(data: &FeatureMatrix, likelihood: Likelihood) -> Result<TrainedModel> {
    let params = NbParams {
        likelihood,
        ..NbParams::default()
    };
    train(data, &Hyperparameters::NaiveBayes(params), 0)
}

pub fn train_linear_svm(data: &FeatureMatrix, hyper: &SvmParams, seed: u64) -> Result<TrainedModel> {
    train(data, &Hyperparameters::LinearSvm(hyper.clone()), seed)
}

pub fn train_mlp(data: &FeatureMatrix, hyper: &MlpParams, seed: u64) -> Result<TrainedModel> {
    train(data, &Hyperparameters::Mlp(hyper.clone()), seed)
}

fn fingerprint(data: &FeatureMatrix, hyper: &Hyperparameters, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(serde_json::to_vec(hyper).expect("hyperparameters serialize"));
    h.update((data.n_features() as u64).to_le_bytes());
    for ((id, row), label) in data.ids.iter().zip(&data.rows).zip(&data.labels) {
        h.update(id.as_bytes());
        h.update([0, label.index() as u8]);
        for &(j, v) in &row.pairs {
            h.update((j as u64).to_le_bytes());
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Index of the larger score; ties go to `ZeroPublications`.
pub(crate) fn argmax_label(scores: [f64; 2]) -> Label {
    if scores[1] > scores[0] {
        Label::Productive
    } else {
        Label::ZeroPublications
    }
}
