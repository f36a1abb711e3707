//! Linear SVM trained in the primal.
//!
//! Minimizes `(lambda / 2)(|w|^2 + b^2) + mean_i max(0, 1 - y_i (w.x_i + b))`
//! with `lambda = 1 / (C n)`, which has the same minimizer as the usual
//! `|w|^2 / 2 + C sum hinge` form (the bias is regularized like a weight on a
//! constant feature). Each iteration takes a full-batch subgradient step of
//! size `1 / (lambda t)`, projects onto the ball of radius `1 / sqrt(lambda)`,
//! and the iterate with the lowest objective is kept.

use serde::{Deserialize, Serialize};

use super::metrics::Confusion;
use super::preprocess::Standardizer;
use super::FeatureMatrix;
use crate::corpus::{stratified_kfold, Label};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, Stream};
use crate::topical::SparseVector;

/// Candidate values of C for nested selection.
pub const C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
const INNER_FOLDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// `None` selects C from [`C_GRID`] by inner cross-validation.
    pub c: Option<f64>,
    pub epochs: usize,
    pub standardize: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: None,
            epochs: 300,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    /// Set when training saw a single class.
    pub constant: Option<Label>,
    standardizer: Option<Standardizer>,
}

fn sign(label: Label) -> f64 {
    match label {
        Label::Productive => 1.0,
        Label::ZeroPublications => -1.0,
    }
}

impl LinearSvm {
    /// The seed only drives the inner folds used to pick C.
    pub fn fit(data: &FeatureMatrix, params: &SvmParams, seed: u64) -> Result<Self> {
        data.require_non_empty()?;
        let c_ok = params.c.is_none_or(|c| c > 0.0 && c.is_finite());
        if !c_ok || params.epochs == 0 {
            return Err(Error::InvalidParameter(format!(
                "SVM needs C > 0 and epochs >= 1 (C = {:?}, epochs = {})",
                params.c, params.epochs
            )));
        }
        let d = data.n_features();
        let counts = data.class_counts();
        if counts[0] == 0 || counts[1] == 0 {
            let only = if counts[1] > 0 { Label::Productive } else { Label::ZeroPublications };
            return Ok(LinearSvm {
                weights: vec![0.0; d],
                bias: 0.0,
                c: params.c.unwrap_or(1.0),
                constant: Some(only),
                standardizer: None,
            });
        }

        let standardizer = params.standardize.then(|| Standardizer::fit(data));
        let rows: Vec<SparseVector> = match &standardizer {
            Some(s) => data.rows.iter().map(|r| s.transform_sparse(r)).collect(),
            None => data.rows.clone(),
        };
        let c = match params.c {
            Some(c) => c,
            None => select_c(&rows, &data.labels, d, params.epochs, seed),
        };
        let y: Vec<f64> = data.labels.iter().map(|&l| sign(l)).collect();
        let (weights, bias) = solve(&rows, &y, d, c, params.epochs);
        Ok(LinearSvm {
            weights,
            bias,
            c,
            constant: None,
            standardizer,
        })
    }

/// `w.x + b` in the (possibly standardized) training space.
    pub fn decision(&self, row: &SparseVector) -> f64 {
        match &self.standardizer {
            Some(s) => {
                let z = s.transform(row);
                z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
            }
            None => score(&self.weights, self.bias, row),
        }
    }

    /// Positive scores predict `Productive`; zero predicts `ZeroPublications`.
    pub fn predict(&self, row: &SparseVector) -> Label {
        if let Some(l) = self.constant {
            return l;
        }
        if self.decision(row) > 0.0 {
            Label::Productive
        } else {
            Label::ZeroPublications
        }
    }
}

fn solve(rows: &[SparseVector], y: &[f64], d: usize, c: f64, epochs: usize) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let lambda = 1.0 / (c * n);
    let radius = 1.0 / lambda.sqrt();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut best = (f64::INFINITY, w.clone(), b);
    let mut grad = vec![0.0; d];
    for t in 1..=epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        let mut hinge = 0.0;
        for (x, &yi) in rows.iter().zip(y) {
            let margin = yi * (score(&w, b, x));
            if margin < 1.0 {
                hinge += 1.0 - margin;
                for &(j, v) in &x.pairs {
                    grad[j] -= yi * v;
                }
                grad_b -= yi;
            }
        }
        let norm_sq = w.iter().map(|v| v * v).sum::<f64>() + b * b;
        let objective = lambda / 2.0 * norm_sq + hinge / n;
        if objective < best.0 {
            best = (objective, w.clone(), b);
        }

        let eta = 1.0 / (lambda * t as f64);
        for (wj, gj) in w.iter_mut().zip(&grad) {
            *wj -= eta * (lambda * *wj + gj / n);
        }
        b -= eta * (lambda * b + grad_b / n);
        let norm = (w.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
        if norm > radius {
            let s = radius / norm;
            w.iter_mut().for_each(|v| *v *= s);
            b *= s;
        }
    }
    (best.1, best.2)
}

/// Best mean inner-fold F1 over [`C_GRID`], smaller C on ties.
fn select_c(rows: &[SparseVector], labels: &[Label], d: usize, epochs: usize, seed: u64) -> f64 {
    let min_class = Label::BOTH
        .iter()
        .map(|&l| labels.iter().filter(|&&x| x == l).count())
        .min()
        .unwrap_or(0);
    let folds = INNER_FOLDS.min(min_class);
    let fallback = 1.0;
    if folds < 2 {
        return fallback;
    }
    let Ok(assignment) = stratified_kfold(labels, folds, derive_seed(seed, Stream::InnerFolds, 0)) else {
        return fallback;
    };
    let mut scores = [0.0; C_GRID.len()];
    for f in 0..folds {
        let train = assignment.train_indices(f);
        let test = assignment.test_indices(f);
        let train_rows: Vec<SparseVector> = train.iter().map(|&i| rows[i].clone()).collect();
        let train_y: Vec<f64> = train.iter().map(|&i| sign(labels[i])).collect();
        let truth: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
        for (g, &c) in C_GRID.iter().enumerate() {
            let (w, b) = solve(&train_rows, &train_y, d, c, epochs);
            let pred: Vec<Label> = test
                .iter()
                .map(|&i| if score(&w, b, &rows[i]) > 0.0 { Label::Productive } else { Label::ZeroPublications })
                .collect();
            let conf = Confusion::from_predictions(&pred, &truth, Label::Productive).expect("aligned");
            scores[g] += conf.f1();
        }
    }
    let mut best = 0;
    for g in 1..C_GRID.len() {
        if scores[g] > scores[best] {
            best = g;
        }
    }
    C_GRID[best]
}

fn score(w: &[f64], b: f64, x: &SparseVector) -> f64 {
    x.pairs.iter().map(|&(j, v)| w[j] * v).sum::<f64>() + b
}
