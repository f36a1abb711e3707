use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    /// Counts with `positive` as the positive class.
    pub fn from_predictions(predictions: &[Label], truth: &[Label], positive: Label) -> Result<Self> {
        if predictions.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: predictions.len(),
                right: truth.len(),
            });
        }
        let mut c = Confusion::default();
        for (&p, &t) in predictions.iter().zip(truth) {
            match (p == positive, t == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn correct(&self) -> usize {
        self.tp + self.tn
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `2PR / (P + R)`, 0 when `P + R = 0`.
    pub fn f1(&self) -> f64 {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    }

    /// The same counts seen from the other class.
    pub fn flipped(&self) -> Confusion {
        Confusion {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn merge(&self, other: &Confusion) -> Confusion {
        Confusion {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Positive-class F1 with `Productive` as the positive class.
pub fn f1_score(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    Ok(Confusion::from_predictions(predictions, truth, Label::Productive)?.f1())
}

/// Unweighted mean of both classes' F1.
pub fn macro_f1(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    let c = Confusion::from_predictions(predictions, truth, Label::Productive)?;
    Ok((c.f1() + c.flipped().f1()) / 2.0)
}

/// `P[Bin(n_total, p_dominant) >= n_correct]`, summed in log space.
pub fn significance_pvalue(n_correct: usize, n_total: usize, p_dominant: f64) -> Result<f64> {
    if n_correct > n_total {
        return Err(Error::InvalidParameter(format!(
            "n_correct ({n_correct}) exceeds n_total ({n_total})"
        )));
    }
    if !(p_dominant > 0.0 && p_dominant < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_dominant must lie in (0, 1), got {p_dominant}"
        )));
    }
    if n_correct == 0 {
        return Ok(1.0);
    }
    if n_correct == n_total {
        if let Ok(n) = i32::try_from(n_total) {
            return Ok(p_dominant.powi(n));
        }
    }
    let mut ln_fact = Vec::with_capacity(n_total + 1);
    ln_fact.push(0.0f64);
    for i in 1..=n_total {
        ln_fact.push(ln_fact[i - 1] + (i as f64).ln());
    }
    let (lp, lq) = (p_dominant.ln(), (-p_dominant).ln_1p());
    let terms: Vec<f64> = (n_correct..=n_total)
        .map(|i| {
            ln_fact[n_total] - ln_fact[i] - ln_fact[n_total - i]
                + i as f64 * lp
                + (n_total - i) as f64 * lq
        })
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    Ok((max + sum.ln()).exp().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Productive as P, ZeroPublications as Z};

    #[test]
    fn f1_examples() {
        assert_eq!(f1_score(&[P, Z, P], &[P, Z, P]).unwrap(), 1.0);
        assert_eq!(f1_score(&[Z, Z, Z], &[P, Z, P]).unwrap(), 0.0);
        // TP=3, FP=1, FN=2.
        let pred = [P, P, P, P, Z, Z];
        let truth = [P, P, P, Z, P, P];
        assert!((f1_score(&pred, &truth).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(f1_score(&[P], &[P, Z]).is_err());
    }

    #[test]
    fn macro_averages_both_classes() {
        let pred = [P, Z, Z, Z];
        let truth = [P, P, Z, Z];
        // positive F1 = 2/3, negative: P=2/3, R=1 -> 0.8.
        assert!((macro_f1(&pred, &truth).unwrap() - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pvalue_examples() {
        assert_eq!(significance_pvalue(0, 10, 0.5).unwrap(), 1.0);
        let p = significance_pvalue(10, 10, 0.5).unwrap();
        assert_eq!(p, 2f64.powi(-10));
        assert!(significance_pvalue(11, 10, 0.5).is_err());
        assert!(significance_pvalue(1, 10, 1.0).is_err());
        assert!(significance_pvalue(1, 10, 0.0).is_err());
    }

    #[test]
    fn pvalue_against_direct_sum() {
        // n = 20, p = 0.6, k >= 16.
        let mut c = 1.0f64;
        let mut direct = 0.0;
        for i in 0..=20u32 {
            if i > 0 {
                c = c * f64::from(20 - i + 1) / f64::from(i);
            }
            if i >= 16 {
                direct += c * 0.6f64.powi(i as i32) * 0.4f64.powi(20 - i as i32);
            }
        }
        let p = significance_pvalue(16, 20, 0.6).unwrap();
        assert!((p - direct).abs() < 1e-12, "{p} vs {direct}");
    }
}
