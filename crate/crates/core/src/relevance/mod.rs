//! Gini mean-decrease-impurity importance, rank aggregation across
//! resamples and the Nemenyi critical difference.

pub mod gini;
pub mod ranking;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gini::{gini_from_counts, gini_impurity, impurity_decrease, ImpurityRecord};
pub use ranking::{average_rank, critical_difference, q_alpha, rank_descending, Alpha, RankTable};

use crate::corpus::repeat_resamples;
use crate::error::{Error, Result};
use crate::ml::cv::{FeatureConfig, PreparedCorpus};
use crate::ml::{train, ForestParams, Hyperparameters, Model, TrainedModel};
use crate::seed::{derive_seed, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceWeighting {
    /// Plain mean of the decreases over the nodes using a feature.
    #[default]
    PerNode,
    /// Mean weighted by the number of instances reaching each node.
    InstanceWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureImportance {
    /// 0 for a feature no node splits on.
    pub mean_delta_g: f64,
    pub node_count: usize,
}

/// Per-feature mean impurity decrease over every split node of a tree or
/// forest.
pub fn feature_importance(model: &TrainedModel, weighting: ImportanceWeighting) -> Result<Vec<FeatureImportance>> {
    let trees: Vec<_> = match &model.model {
        Model::Tree(t) => vec![t],
        Model::Forest(f) => f.trees.iter().collect(),
        _ => return Err(Error::UnsupportedModel(model.algorithm.as_str().to_string())),
    };
    let d = model.n_features;
    let mut sums = vec![0.0; d];
    let mut weights = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for record in trees.iter().flat_map(|t| t.impurity_records()) {
        let w = match weighting {
            ImportanceWeighting::PerNode => 1.0,
            ImportanceWeighting::InstanceWeighted => (record.n_left + record.n_right) as f64,
        };
        sums[record.feature] += w * record.delta_g;
        weights[record.feature] += w;
        counts[record.feature] += 1;
    }
    Ok((0..d)
        .map(|j| FeatureImportance {
            mean_delta_g: if counts[j] == 0 { 0.0 } else { sums[j] / weights[j] },
            node_count: counts[j],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceSettings {
    pub n_resamples: usize,
    pub base_seed: u64,
    pub forest: ForestParams,
    pub weighting: ImportanceWeighting,
    pub alpha: Alpha,
}

impl RelevanceSettings {
    pub fn new(base_seed: u64) -> Self {
        RelevanceSettings {
            n_resamples: 10,
            base_seed,
            forest: ForestParams::default(),
            weighting: ImportanceWeighting::PerNode,
            alpha: Alpha::P05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceRow {
    pub feature: String,
    /// Mean over resamples of the per-resample importance.
    pub mean_importance: f64,
    /// Split nodes using the feature, summed over resamples.
    pub node_count: usize,
    pub per_resample_rank: Vec<f64>,
    pub average_rank: f64,
    /// Whether the gap to the best average rank exceeds the critical
    /// difference; `None` without a critical difference.
    pub differs_from_best: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceConfig {
    pub features: FeatureConfig,
    pub settings: RelevanceSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRelevanceReport {
    pub config: RelevanceConfig,
    /// Sorted by ascending average rank.
    pub rows: Vec<RelevanceRow>,
    pub n_datasets: usize,
    pub critical_difference: Option<f64>,
}

impl FeatureRelevanceReport {
    /// Assembles the ranking from per-resample importances over `names`.
    pub fn from_importances(
        config: RelevanceConfig,
        names: &[String],
        importances: &[Vec<FeatureImportance>],
    ) -> Result<Self> {
        let values: Vec<Vec<f64>> = importances
            .iter()
            .map(|v| v.iter().map(|i| i.mean_delta_g).collect())
            .collect();
        let table = average_rank(&values)?;
        if names.len() != table.average.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} names for {} features",
                names.len(),
                table.average.len()
            )));
        }
        let n_datasets = importances.len();
        let k = names.len();
        let critical_difference = if n_datasets >= 2 && ranking::supported_k().contains(&k) {
            Some(critical_difference(k, n_datasets, config.settings.alpha)?)
        } else {
            log::warn!("no critical difference for {k} features over {n_datasets} resamples");
            None
        };
        let best = table.order.first().map_or(0.0, |&j| table.average[j]);
        let rows = table
            .order
            .iter()
            .map(|&j| RelevanceRow {
                feature: names[j].clone(),
                mean_importance: values.iter().map(|v| v[j]).sum::<f64>() / n_datasets as f64,
                node_count: importances.iter().map(|v| v[j].node_count).sum(),
                per_resample_rank: table.per_resample.iter().map(|r| r[j]).collect(),
                average_rank: table.average[j],
                differs_from_best: critical_difference.map(|cd| table.average[j] - best > cd),
            })
            .collect();
        Ok(FeatureRelevanceReport {
            config,
            rows,
            n_datasets,
            critical_difference,
        })
    }
}

/// Trains one forest per balanced resample on the whole resample and ranks
/// the features by impurity decrease.
pub fn relevance_analysis(prepared: &PreparedCorpus, settings: &RelevanceSettings) -> Result<FeatureRelevanceReport> {
    if settings.n_resamples == 0 {
        return Err(Error::InvalidParameter("n_resamples must be at least 1".into()));
    }
    let resamples = repeat_resamples(&prepared.labels, settings.n_resamples, settings.base_seed)?;
    let hyper = Hyperparameters::RandomForest(settings.forest.clone());
    let results = resamples
        .par_iter()
        .enumerate()
        .map(|(r, ds)| {
            let idx: Vec<usize> = ds.instances.iter().map(|i| i.index).collect();
            let transform = prepared.fit_transform(&idx)?;
            let m = prepared.matrix(&transform, &idx)?;
            let model = train(&m, &hyper, derive_seed(settings.base_seed, Stream::Model, r as u64))?;
            Ok((m.feature_names, feature_importance(&model, settings.weighting)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let names = results[0].0.clone();
    if results.iter().any(|(n, _)| *n != names) {
        return Err(Error::SchemaMismatch(
            "feature names differ across resamples; fit the vocabulary globally".into(),
        ));
    }
    let importances: Vec<Vec<FeatureImportance>> = results.into_iter().map(|(_, i)| i).collect();
    FeatureRelevanceReport::from_importances(
        RelevanceConfig {
            features: prepared.config.clone(),
            settings: settings.clone(),
        },
        &names,
        &importances,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::ml::{Algorithm, FeatureFamily, FeatureMatrix, Node, TreeParams};

    #[test]
    fn single_split_tree() {
        let rows = vec![vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let labels = [Label::ZeroPublications, Label::ZeroPublications, Label::Productive, Label::Productive];
        let m = FeatureMatrix::from_dense(&rows, &labels).unwrap();
        let model = train(&m, &Hyperparameters::Dtree(TreeParams::default()), 0).unwrap();
        let imp = feature_importance(&model, ImportanceWeighting::PerNode).unwrap();
        assert_eq!(imp[0].mean_delta_g, 0.5);
        assert_eq!(imp[0].node_count, 1);
        assert_eq!(imp[1], FeatureImportance::default());
    }

    fn one_split_tree(feature: usize, delta_g: f64) -> crate::ml::DecisionTree {
        let leaf = |label| Node::Leaf { label, counts: [1, 1] };
        crate::ml::DecisionTree {
            nodes: vec![
                Node::Split {
                    feature,
                    threshold: 0.5,
                    gain: 0.0,
                    left: 1,
                    right: 2,
                    counts: [2, 2],
                    impurity: ImpurityRecord {
                        node_id: 0,
                        feature,
                        g_before: 0.5,
                        g_left: 0.5 - delta_g,
                        g_right: 0.5 - delta_g,
                        n_left: 2,
                        n_right: 2,
                        delta_g,
                    },
                },
                leaf(Label::ZeroPublications),
                leaf(Label::Productive),
            ],
            n_features: 2,
        }
    }

    #[test]
    fn forest_importance_averages_over_nodes() {
        let forest = crate::ml::RandomForest {
            trees: vec![one_split_tree(0, 0.4), one_split_tree(0, 0.2)],
        };
        let model = TrainedModel {
            algorithm: Algorithm::RandomForest,
            hyperparameters: Hyperparameters::RandomForest(ForestParams::default()),
            model: Model::Forest(forest),
            n_features: 2,
            fingerprint: String::new(),
        };
        let imp = feature_importance(&model, ImportanceWeighting::PerNode).unwrap();
        assert!((imp[0].mean_delta_g - 0.3).abs() < 1e-15);
        assert_eq!(imp[0].node_count, 2);
        assert_eq!(imp[1].node_count, 0);
    }

    #[test]
    fn unsupported_models() {
        let m = FeatureMatrix::from_dense(&[vec![0.0], vec![1.0]], &[Label::ZeroPublications, Label::Productive]).unwrap();
        let knn = train(&m, &Algorithm::Knn.default_hyperparameters(FeatureFamily::Complexity), 0).unwrap();
        assert!(matches!(
            feature_importance(&knn, ImportanceWeighting::PerNode),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
