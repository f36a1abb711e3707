use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::topical::SparseVector;

/// Per-feature medians learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianImputer {
    pub medians: Vec<f64>,
}

impl MedianImputer {
    /// A feature missing in every row gets median 0.
    pub fn fit(rows: &[&[Option<f64>]], n_features: usize) -> Self {
        let medians = (0..n_features)
            .map(|j| {
                let mut present: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
                median(&mut present).unwrap_or(0.0)
            })
            .collect();
        MedianImputer { medians }
    }

    pub fn transform(&self, row: &[Option<f64>]) -> Vec<f64> {
        row.iter()
            .zip(&self.medians)
            .map(|(v, m)| v.unwrap_or(*m))
            .collect()
    }
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Z-scores with population statistics; constant features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &FeatureMatrix) -> Self {
        let d = data.n_features();
        let n = data.len().max(1) as f64;
        let mut sums = vec![0.0; d];
        let mut nnz = vec![0usize; d];
        for row in &data.rows {
            for &(j, v) in &row.pairs {
                sums[j] += v;
                nnz[j] += 1;
            }
        }
        let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
        let mut sq = vec![0.0; d];
        for row in &data.rows {
            for &(j, v) in &row.pairs {
                sq[j] += (v - means[j]).powi(2);
            }
        }
        let scales = (0..d)
            .map(|j| {
                let implicit = (data.len() - nnz[j]) as f64;
                let var = (sq[j] + implicit * means[j] * means[j]) / n;
                let sd = var.sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { means, scales }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_into(&self, row: &SparseVector, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = -self.means[j] / self.scales[j];
        }
        for &(j, v) in &row.pairs {
            out[j] = (v - self.means[j]) / self.scales[j];
        }
    }

    pub fn transform(&self, row: &SparseVector) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.transform_into(row, &mut out);
        out
    }

    pub fn transform_sparse(&self, row: &SparseVector) -> SparseVector {
        SparseVector::from_dense(&self.transform(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn imputer_fills_missing() {
        let a = [Some(1.0), None];
        let b = [Some(3.0), None];
        let c = [None, None];
        let imp = MedianImputer::fit(&[&a, &b, &c], 2);
        assert_eq!(imp.medians, [2.0, 0.0]);
        assert_eq!(imp.transform(&[None, Some(5.0)]), [2.0, 5.0]);
    }

    #[test]
    fn standardizer_matches_dense_statistics() {
        let labels = [Label::Productive; 4];
        let m = FeatureMatrix::from_dense(
            &[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0], vec![6.0, 5.0]],
            &labels,
        )
        .unwrap();
        let s = Standardizer::fit(&m);
        assert_eq!(s.means, [3.0, 5.0]);
        assert!((s.scales[0] - 3.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.scales[1], 1.0);

        let mut sparse = m.clone();
        sparse.rows = m
            .rows
            .iter()
            .map(|r| SparseVector::from_pairs(r.pairs.clone()))
            .collect();
        let s2 = Standardizer::fit(&sparse);
        assert_eq!(s2.means, s.means);
        assert!((s2.scales[0] - s.scales[0]).abs() < 1e-15);
        let z = s.transform(&m.rows[3]);
        assert!((z[0] - 3.0 / 3.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(z[1], 0.0);
    }
}
