use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Q_TABLE: &str = include_str!("../../data/nemenyi_q.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Alpha {
    #[default]
    #[serde(rename = "0.05")]
    P05,
    #[serde(rename = "0.10")]
    P10,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::P05 => 0.05,
            Alpha::P10 => 0.10,
        }
    }

    pub fn from_value(alpha: f64) -> Result<Self> {
        if (alpha - 0.05).abs() < 1e-12 {
            Ok(Alpha::P05)
        } else if (alpha - 0.10).abs() < 1e-12 {
            Ok(Alpha::P10)
        } else {
            Err(Error::InvalidParameter(format!(
                "critical difference table covers alpha 0.05 and 0.10, got {alpha}"
            )))
        }
    }
}

struct QTable {
    min_k: usize,
    rows: Vec<[f64; 2]>,
}

fn q_table() -> &'static QTable {
    static TABLE: OnceLock<QTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut min_k = usize::MAX;
        let mut rows = Vec::new();
        for line in Q_TABLE.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split('\t').collect();
            let k: usize = cols[0].parse().expect("bundled q table: k");
            min_k = min_k.min(k);
            rows.push([
                cols[1].parse().expect("bundled q table: alpha 0.05"),
                cols[2].parse().expect("bundled q table: alpha 0.10"),
            ]);
        }
        QTable { min_k, rows }
    })
}

/// Bundled range of rank counts.
pub fn supported_k() -> std::ops::RangeInclusive<usize> {
    let t = q_table();
    t.min_k..=t.min_k + t.rows.len() - 1
}

/// Studentized-range quantile divided by sqrt(2), as used by the Nemenyi test.
pub fn q_alpha(k: usize, alpha: Alpha) -> Result<f64> {
    let range = supported_k();
    if !range.contains(&k) {
        return Err(Error::UnsupportedRankCount {
            k,
            min: *range.start(),
            max: *range.end(),
        });
    }
    let row = q_table().rows[k - range.start()];
    Ok(match alpha {
        Alpha::P05 => row[0],
        Alpha::P10 => row[1],
    })
}

/// `q_alpha(k) * sqrt(k (k + 1) / (6 n))`.
pub fn critical_difference(k: usize, n_datasets: usize, alpha: Alpha) -> Result<f64> {
    if n_datasets < 2 {
        return Err(Error::InvalidParameter(format!(
            "critical difference needs at least 2 datasets, got {n_datasets}"
        )));
    }
    let q = q_alpha(k, alpha)?;
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n_datasets as f64)).sqrt())
}

/// Ranks by descending value, 1 for the largest; tied values share the mean
/// of the positions they span.
pub fn rank_descending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1 ..= j share their mean.
        let shared = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = shared;
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    /// `per_resample[r][j]`: rank of feature `j` in resample `r`.
    pub per_resample: Vec<Vec<f64>>,
    pub average: Vec<f64>,
    /// Feature indices sorted by ascending average rank, ties by index.
    pub order: Vec<usize>,
}

/// Ranks each resample's importances and averages the ranks.
pub fn average_rank(importances: &[Vec<f64>]) -> Result<RankTable> {
    let Some(first) = importances.first() else {
        return Err(Error::InvalidParameter("no importance vectors to rank".into()));
    };
    let k = first.len();
    if let Some(bad) = importances.iter().find(|v| v.len() != k) {
        return Err(Error::SchemaMismatch(format!(
            "importance vectors have {} and {} features",
            k,
            bad.len()
        )));
    }
    let per_resample: Vec<Vec<f64>> = importances.iter().map(|v| rank_descending(v)).collect();
    let n = per_resample.len() as f64;
    let average: Vec<f64> = (0..k)
        .map(|j| per_resample.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| average[a].total_cmp(&average[b]).then(a.cmp(&b)));
    Ok(RankTable {
        per_resample,
        average,
        order,
    })
}
