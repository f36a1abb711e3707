use serde::{Deserialize, Serialize};

use super::metrics::Confusion;
use super::preprocess::Standardizer;
use super::FeatureMatrix;
use crate::corpus::{stratified_kfold, Label};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, Stream};
use crate::topical::SparseVector;

/// Candidate neighbour counts for nested selection.
pub const K_GRID: [usize; 6] = [1, 3, 5, 7, 11, 15];
const INNER_FOLDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`; a zero vector is at distance 1 from everything.
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    /// `None` selects k from [`K_GRID`] by inner cross-validation.
    pub k: Option<usize>,
    pub metric: Metric,
    pub standardize: bool,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: None,
            metric: Metric::Euclidean,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub metric: Metric,
    standardizer: Option<Standardizer>,
    rows: Vec<SparseVector>,
    labels: Vec<Label>,
}

impl Knn {
    pub fn fit(data: &FeatureMatrix, params: &KnnParams, seed: u64) -> Result<Self> {
        data.require_non_empty()?;
        let standardizer = params.standardize.then(|| Standardizer::fit(data));
        let rows: Vec<SparseVector> = match &standardizer {
            Some(s) => data.rows.iter().map(|r| s.transform_sparse(r)).collect(),
            None => data.rows.clone(),
        };
        let k = match params.k {
            Some(k) => {
                check_k(k, rows.len())?;
                k
            }
            None => select_k(&rows, &data.labels, params.metric, seed),
        };
        Ok(Knn {
            k,
            metric: params.metric,
            standardizer,
            rows,
            labels: data.labels.clone(),
        })
    }

    pub fn predict(&self, row: &SparseVector) -> Label {
        let query = match &self.standardizer {
            Some(s) => s.transform_sparse(row),
            None => row.clone(),
        };
        let order = neighbours(&self.rows, &query, self.metric);
        vote(&order, &self.labels, self.k)
    }
}

/// Majority label among the `k` nearest training rows.
pub fn knn_predict(train: &FeatureMatrix, query: &SparseVector, k: usize, metric: Metric) -> Result<Label> {
    train.require_non_empty()?;
    check_k(k, train.len())?;
    let order = neighbours(&train.rows, query, metric);
    Ok(vote(&order, &train.labels, k))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidParameter(format!("k must lie in 1..={n}, got {k}")))
    } else {
        Ok(())
    }
}

pub fn distance(a: &SparseVector, b: &SparseVector, metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => squared_euclidean(a, b).sqrt(),
        Metric::Cosine => {
            let (na, nb) = (a.norm(), b.norm());
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                1.0 - a.dot(b) / (na * nb)
            }
        }
    }
}

fn squared_euclidean(a: &SparseVector, b: &SparseVector) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    let (pa, pb) = (&a.pairs, &b.pairs);
    while i < pa.len() || j < pb.len() {
        let d = match (pa.get(i), pb.get(j)) {
            (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                i += 1;
                j += 1;
                va - vb
            }
            (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                i += 1;
                va
            }
            (Some(&(_, va)), None) => {
                i += 1;
                va
            }
            (_, Some(&(_, vb))) => {
                j += 1;
                vb
            }
            (None, None) => unreachable!(),
        };
        acc += d * d;
    }
    acc
}

/// Training indices ordered by distance, ties by index.
fn neighbours(rows: &[SparseVector], query: &SparseVector, metric: Metric) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (distance(r, query, metric), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().map(|(_, i)| i).collect()
}

/// Majority among the first `k`; a tied vote goes to the nearest neighbour.
fn vote(order: &[usize], labels: &[Label], k: usize) -> Label {
    let mut v = [0usize; 2];
    for &i in &order[..k] {
        v[labels[i].index()] += 1;
    }
    match v[1].cmp(&v[0]) {
        std::cmp::Ordering::Greater => Label::Productive,
        std::cmp::Ordering::Less => Label::ZeroPublications,
        std::cmp::Ordering::Equal => labels[order[0]],
    }
}

/// Picks the grid value with the best mean inner-fold F1, smaller k on ties.
fn select_k(rows: &[SparseVector], labels: &[Label], metric: Metric, seed: u64) -> usize {
    let min_class = Label::BOTH
        .iter()
        .map(|&l| labels.iter().filter(|&&x| x == l).count())
        .min()
        .unwrap_or(0);
    let folds = INNER_FOLDS.min(min_class);
    if folds < 2 {
        return 1;
    }
    let Ok(assignment) = stratified_kfold(labels, folds, derive_seed(seed, Stream::InnerFolds, 0)) else {
        return 1;
    };
    let mut scores = vec![0.0; K_GRID.len()];
    let mut usable = vec![true; K_GRID.len()];
    for f in 0..folds {
        let train = assignment.train_indices(f);
        let test = assignment.test_indices(f);
        let train_rows: Vec<SparseVector> = train.iter().map(|&i| rows[i].clone()).collect();
        let train_labels: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
        let truth: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
        let orders: Vec<Vec<usize>> = test.iter().map(|&i| neighbours(&train_rows, &rows[i], metric)).collect();
        for (g, &k) in K_GRID.iter().enumerate() {
            if k > train_rows.len() {
                usable[g] = false;
                continue;
            }
            let pred: Vec<Label> = orders.iter().map(|o| vote(o, &train_labels, k)).collect();
            let c = Confusion::from_predictions(&pred, &truth, Label::Productive).expect("aligned");
            scores[g] += c.f1();
        }
    }
    let mut best = 0;
    for g in 1..K_GRID.len() {
        if usable[g] && scores[g] > scores[best] {
            best = g;
        }
    }
    K_GRID[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Productive as P, ZeroPublications as Z};

    fn toy() -> FeatureMatrix {
        FeatureMatrix::from_dense(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 3.0], vec![4.0, 1.0]],
            &[Z, Z, P, P, P],
        )
        .unwrap()
    }

    #[test]
    fn query_on_training_point() {
        let m = toy();
        for (r, l) in m.rows.iter().zip(&m.labels) {
            assert_eq!(knn_predict(&m, r, 1, Metric::Euclidean).unwrap(), *l);
        }
    }

    #[test]
    fn three_neighbours_by_enumeration() {
        // Query (1, 1): distances 1.414 (Z), 1.0 (Z), 1.414 (P), 2.828 (P), 3.0 (P).
        // Nearest three: idx 1 (Z), idx 0 (Z, tie broken by index), idx 2 (P).
        let q = SparseVector::from_dense(&[1.0, 1.0]);
        assert_eq!(knn_predict(&toy(), &q, 3, Metric::Euclidean).unwrap(), Z);
    }

    #[test]
    fn full_vote_tie_goes_to_nearest() {
        let m = FeatureMatrix::from_dense(&[vec![0.0], vec![1.0], vec![5.0], vec![6.0]], &[Z, P, Z, P]).unwrap();
        assert_eq!(knn_predict(&m, &SparseVector::from_dense(&[0.9]), 4, Metric::Euclidean).unwrap(), P);
        assert_eq!(knn_predict(&m, &SparseVector::from_dense(&[0.1]), 4, Metric::Euclidean).unwrap(), Z);
    }

    #[test]
    fn k_range_checked() {
        let m = toy();
        let q = SparseVector::new();
        assert!(knn_predict(&m, &q, 0, Metric::Euclidean).is_err());
        assert!(knn_predict(&m, &q, 6, Metric::Euclidean).is_err());
        let empty = FeatureMatrix::from_dense(&[], &[]).unwrap();
        assert!(knn_predict(&empty, &q, 1, Metric::Euclidean).is_err());
    }

    #[test]
    fn sparse_distance_matches_dense() {
        let a = SparseVector::from_pairs(vec![(0, 1.0), (3, -2.0)]);
        let b = SparseVector::from_pairs(vec![(1, 4.0), (3, 1.0)]);
        assert_eq!(squared_euclidean(&a, &b), 1.0 + 16.0 + 9.0);
        let c = distance(&a, &SparseVector::from_pairs(vec![(0, 2.0), (3, -4.0)]), Metric::Cosine);
        assert!(c.abs() < 1e-15);
        assert_eq!(distance(&a, &SparseVector::new(), Metric::Cosine), 1.0);
    }

    #[test]
    fn grid_selection_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 10) as f64 + if i < 15 { 0.0 } else { 3.0 }]).collect();
        let labels: Vec<Label> = (0..30).map(|i| if i < 15 { Z } else { P }).collect();
        let m = FeatureMatrix::from_dense(&rows, &labels).unwrap();
        let a = Knn::fit(&m, &KnnParams::default(), 3).unwrap();
        let b = Knn::fit(&m, &KnnParams::default(), 3).unwrap();
        assert_eq!(a.k, b.k);
        assert!(K_GRID.contains(&a.k));
    }
}
