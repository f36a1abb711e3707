use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// One split node's impurity bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpurityRecord {
    pub node_id: usize,
    pub feature: usize,
    pub g_before: f64,
    pub g_left: f64,
    pub g_right: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub delta_g: f64,
}

/// `sum p_i (1 - p_i)` over a class distribution.
pub fn gini_impurity(probabilities: &[f64]) -> Result<f64> {
    if probabilities.is_empty() {
        return Err(Error::InvalidParameter("empty class distribution".into()));
    }
    if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "class probability {p} is not a finite non-negative number"
        )));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "class probabilities sum to {total}, expected 1"
        )));
    }
    Ok(probabilities.iter().map(|p| p * (1.0 - p)).sum())
}

/// Gini impurity of a node from its class counts; 0 for an empty node.
pub fn gini_from_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * (1.0 - p)
        })
        .sum()
}

/// `G_before - beta_L G_left - beta_R G_right`, with the betas the child
/// shares of the parent's instances.
pub fn impurity_decrease(
    g_before: f64,
    g_left: f64,
    g_right: f64,
    n_left: usize,
    n_right: usize,
) -> Result<f64> {
    let n = n_left + n_right;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "impurity decrease needs at least one instance in a child".into(),
        ));
    }
    let beta_left = n_left as f64 / n as f64;
    let beta_right = n_right as f64 / n as f64;
    Ok(g_before - beta_left * g_left - beta_right * g_right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(gini_impurity(&[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(gini_impurity(&[1.0, 0.0]).unwrap(), 0.0);
        let g = gini_impurity(&[1.0 / 17.0, 16.0 / 17.0]).unwrap();
        assert!((g - 0.1107).abs() < 5e-5, "{g}");
        // 2 * 16 / 289 exactly.
        assert!((g - 32.0 / 289.0).abs() < 1e-15);
    }

    #[test]
    fn worked_split() {
        let g_r = gini_impurity(&[1.0 / 17.0, 16.0 / 17.0]).unwrap();
        let d = impurity_decrease(0.5, 0.0, g_r, 15, 17).unwrap();
        assert!((d - 0.4412).abs() < 5e-5, "{d}");
    }

    #[test]
    fn no_information_splits() {
        assert_eq!(impurity_decrease(0.5, 0.5, 0.5, 10, 6).unwrap(), 0.0);
        assert_eq!(impurity_decrease(0.0, 0.0, 0.0, 3, 9).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gini_impurity(&[0.5, 0.6]).is_err());
        assert!(gini_impurity(&[1.5, -0.5]).is_err());
        assert!(gini_impurity(&[]).is_err());
        assert!(impurity_decrease(0.5, 0.0, 0.0, 0, 0).is_err());
        assert!(gini_impurity(&[0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn counts_agree_with_probabilities() {
        assert_eq!(gini_from_counts(&[1, 16]), gini_impurity(&[1.0 / 17.0, 16.0 / 17.0]).unwrap());
        assert_eq!(gini_from_counts(&[0, 0]), 0.0);
    }
}
