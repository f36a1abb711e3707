use serde::{Deserialize, Serialize};

use super::{argmax_label, FeatureMatrix};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::topical::SparseVector;

/// Relative variance floor for the gaussian likelihood.
pub const VARIANCE_FLOOR_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Likelihood {
    #[default]
    Gaussian,
    Multinomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbParams {
    pub likelihood: Likelihood,
    /// Additive smoothing for the multinomial likelihood.
    pub alpha: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams {
            likelihood: Likelihood::Gaussian,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Params {
    Gaussian { means: [Vec<f64>; 2], variances: [Vec<f64>; 2] },
    Multinomial { log_theta: [Vec<f64>; 2] },
}

/// Naive Bayes: `argmax_c sum_i log P(f_i | c) + log P(c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub likelihood: Likelihood,
    pub class_counts: [usize; 2],
    pub log_prior: [f64; 2],
    params: Params,
    n_features: usize,
}

impl NaiveBayes {
    pub fn fit(data: &FeatureMatrix, params: &NbParams) -> Result<Self> {
        data.require_non_empty()?;
        let d = data.n_features();
        let counts = data.class_counts();
        let n = data.len() as f64;
        let log_prior = counts.map(|c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / n).ln() });
        let params = match params.likelihood {
            Likelihood::Gaussian => gaussian(data, counts),
            Likelihood::Multinomial => multinomial(data, params.alpha)?,
        };
        Ok(NaiveBayes {
            likelihood: match params {
                Params::Gaussian { .. } => Likelihood::Gaussian,
                Params::Multinomial { .. } => Likelihood::Multinomial,
            },
            class_counts: counts,
            log_prior,
            params,
            n_features: d,
        })
    }

    /// Per-class `sum_i log P(f_i | c)`, plus `log P(c)` when asked. A class
    /// absent from training scores minus infinity.
    pub fn joint_log_likelihood(&self, row: &SparseVector, include_prior: bool) -> [f64; 2] {
        let mut scores = [0.0; 2];
        for c in 0..2 {
            if self.class_counts[c] == 0 {
                scores[c] = f64::NEG_INFINITY;
                continue;
            }
            scores[c] = match &self.params {
                Params::Gaussian { means, variances } => {
                    let x = row.to_dense(self.n_features);
                    x.iter()
                        .zip(&means[c])
                        .zip(&variances[c])
                        .map(|((x, m), v)| {
                            -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m).powi(2) / (2.0 * v)
                        })
                        .sum()
                }
                Params::Multinomial { log_theta } => {
                    row.pairs.iter().map(|&(j, x)| x * log_theta[c][j]).sum()
                }
            };
            if include_prior {
                scores[c] += self.log_prior[c];
            }
        }
        scores
    }

    /// With equal class counts the prior is a shared constant and is left out.
    pub fn predict(&self, row: &SparseVector) -> Label {
        let equal_priors = self.class_counts[0] == self.class_counts[1];
        argmax_label(self.joint_log_likelihood(row, !equal_priors))
    }
}

fn gaussian(data: &FeatureMatrix, counts: [usize; 2]) -> Params {
    let d = data.n_features();
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    for (row, label) in data.rows.iter().zip(&data.labels) {
        for &(j, v) in &row.pairs {
            sums[label.index()][j] += v;
        }
    }
    let means = [0, 1].map(|c| {
        sums[c]
            .iter()
            .map(|s| if counts[c] == 0 { 0.0 } else { s / counts[c] as f64 })
            .collect::<Vec<f64>>()
    });
    let mut sq = [vec![0.0; d], vec![0.0; d]];
    for (row, label) in data.rows.iter().zip(&data.labels) {
        let x = row.to_dense(d);
        let c = label.index();
        for j in 0..d {
            sq[c][j] += (x[j] - means[c][j]).powi(2);
        }
    }

    // Floor relative to the mean of the overall per-feature variances.
    let n = data.len() as f64;
    let overall_mean: Vec<f64> = (0..d).map(|j| (sums[0][j] + sums[1][j]) / n).collect();
    let mut overall_sq = vec![0.0; d];
    for row in &data.rows {
        let x = row.to_dense(d);
        for j in 0..d {
            overall_sq[j] += (x[j] - overall_mean[j]).powi(2);
        }
    }
    let mean_var = if d == 0 {
        0.0
    } else {
        overall_sq.iter().map(|s| s / n).sum::<f64>() / d as f64
    };
    let floor = if mean_var > 0.0 {
        VARIANCE_FLOOR_FACTOR * mean_var
    } else {
        VARIANCE_FLOOR_FACTOR
    };
    let variances = [0, 1].map(|c| {
        sq[c]
            .iter()
            .map(|s| {
                let v = if counts[c] == 0 { 0.0 } else { s / counts[c] as f64 };
                v.max(floor)
            })
            .collect::<Vec<f64>>()
    });
    Params::Gaussian { means, variances }
}

fn multinomial(data: &FeatureMatrix, alpha: f64) -> Result<Params> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let d = data.n_features();
    let mut totals = [vec![0.0; d], vec![0.0; d]];
    for (row, label) in data.rows.iter().zip(&data.labels) {
        for &(j, v) in &row.pairs {
            if v < 0.0 {
                return Err(Error::InvalidParameter(
                    "multinomial likelihood needs non-negative features".into(),
                ));
            }
            totals[label.index()][j] += v;
        }
    }
    let log_theta = totals.map(|t| {
        let denom = t.iter().sum::<f64>() + alpha * d as f64;
        t.iter().map(|x| ((x + alpha) / denom).ln()).collect::<Vec<f64>>()
    });
    Ok(Params::Multinomial { log_theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Productive as P, ZeroPublications as Z};

    #[test]
    fn gaussian_toy_matches_hand_evaluation() {
        // Class Z at {1, 3}: mean 2, var 1. Class P at {7, 9}: mean 8, var 1.
        let m = FeatureMatrix::from_dense(&[vec![1.0], vec![3.0], vec![7.0], vec![9.0]], &[Z, Z, P, P]).unwrap();
        let nb = NaiveBayes::fit(&m, &NbParams::default()).unwrap();
        let x = SparseVector::from_dense(&[4.0]);
        let s = nb.joint_log_likelihood(&x, false);
        let c = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((s[0] - (c - 2.0)).abs() < 1e-12);
        assert!((s[1] - (c - 8.0)).abs() < 1e-12);
        assert_eq!(nb.predict(&x), Z);
        assert_eq!(nb.predict(&SparseVector::from_dense(&[5.5])), P);
    }

    #[test]
    fn identical_training_point_wins() {
        let m = FeatureMatrix::from_dense(
            &[vec![0.0, 0.0], vec![0.2, 0.1], vec![10.0, 10.0], vec![10.5, 9.5]],
            &[Z, Z, P, P],
        )
        .unwrap();
        let nb = NaiveBayes::fit(&m, &NbParams::default()).unwrap();
        assert_eq!(nb.predict(&m.rows[0]), Z);
        assert_eq!(nb.predict(&m.rows[3]), P);
    }

    #[test]
    fn zero_variance_feature_stays_finite() {
        let m = FeatureMatrix::from_dense(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 5.0], vec![1.0, 6.0]], &[Z, Z, P, P]).unwrap();
        let nb = NaiveBayes::fit(&m, &NbParams::default()).unwrap();
        let s = nb.joint_log_likelihood(&m.rows[0], true);
        assert!(s.iter().all(|v| v.is_finite()));
        assert_eq!(nb.predict(&m.rows[0]), Z);
    }

    #[test]
    fn multinomial_counts() {
        let m = FeatureMatrix::from_dense(&[vec![3.0, 0.0], vec![2.0, 1.0], vec![0.0, 4.0], vec![1.0, 3.0]], &[Z, Z, P, P]).unwrap();
        let p = NbParams {
            likelihood: Likelihood::Multinomial,
            alpha: 1.0,
        };
        let nb = NaiveBayes::fit(&m, &p).unwrap();
        // theta_Z = (6/8, 2/8), theta_P = (2/10, 8/10) with alpha = 1.
        let s = nb.joint_log_likelihood(&SparseVector::from_dense(&[1.0, 0.0]), false);
        assert!((s[0] - 0.75f64.ln()).abs() < 1e-15);
        assert!((s[1] - 0.2f64.ln()).abs() < 1e-15);
        let neg = FeatureMatrix::from_dense(&[vec![-1.0]], &[Z]).unwrap();
        assert!(NaiveBayes::fit(&neg, &p).is_err());
    }

    #[test]
    fn single_class_predicts_that_class() {
        let m = FeatureMatrix::from_dense(&[vec![1.0], vec![2.0]], &[P, P]).unwrap();
        let nb = NaiveBayes::fit(&m, &NbParams::default()).unwrap();
        assert_eq!(nb.predict(&SparseVector::from_dense(&[-50.0])), P);
    }
}
