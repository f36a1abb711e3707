//! File outputs. Every file opens with a comment line carrying the seed and
//! the run configuration as compact JSON, so outputs are self-describing and
//! byte-identical across reruns with the same inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::ml::EvalReport;
use crate::relevance::FeatureRelevanceReport;

const MARKER: &str = "grantscope";

fn io_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

/// `# grantscope seed=<seed> config=<json>`.
pub fn header_line<C: Serialize + ?Sized>(seed: u64, config: &C) -> Result<String> {
    Ok(format!("# {MARKER} seed={seed} config={}", serde_json::to_string(config)?))
}

pub fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

/// Fixed 4 decimals, switching to 4-decimal scientific below 1e-4.
pub fn fmt_p(p: f64) -> String {
    if p != 0.0 && p < 1e-4 {
        format!("{p:.4e}")
    } else {
        format!("{p:.4}")
    }
}

/// One evaluated (dataset, algorithm) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalCell {
    pub dataset: String,
    pub report: EvalReport,
}

/// Per dataset, marks the cell with the highest mean F1 (earliest on ties)
/// when its p-value is below `alpha`.
pub fn best_flags(cells: &[EvalCell], alpha: f64) -> Vec<bool> {
    let mut best: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        match best.get(c.dataset.as_str()) {
            Some(&b) if cells[b].report.mean_f1 >= c.report.mean_f1 => {}
            _ => {
                best.insert(&c.dataset, i);
            }
        }
    }
    (0..cells.len())
        .map(|i| best[cells[i].dataset.as_str()] == i && cells[i].report.is_significant(alpha))
        .collect()
}

/// Summary table: method x dataset x F1 +- SD x p-value.
pub fn write_eval_csv<W: Write, C: Serialize + ?Sized>(
    mut out: W,
    cells: &[EvalCell],
    seed: u64,
    config: &C,
    alpha: f64,
) -> Result<()> {
    writeln!(out, "{}", header_line(seed, config)?).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dataset",
        "algorithm",
        "f1_mean",
        "f1_sd",
        "macro_f1",
        "pooled_f1",
        "n_correct",
        "n_total",
        "p_value",
        "significant",
        "best",
        "n_records",
        "n_excluded",
    ])?;
    for (cell, best) in cells.iter().zip(best_flags(cells, alpha)) {
        let r = &cell.report;
        w.write_record([
            cell.dataset.clone(),
            r.algorithm.to_string(),
            fmt4(r.mean_f1),
            fmt4(r.sd_f1),
            fmt4(r.mean_macro_f1),
            fmt4(r.pooled_f1),
            r.n_correct_per_dataset.to_string(),
            r.n_per_dataset.to_string(),
            fmt_p(r.p_value),
            r.is_significant(alpha).to_string(),
            best.to_string(),
            r.n_records.to_string(),
            r.n_excluded.to_string(),
        ])?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[derive(Serialize)]
struct EvalDocument<'a, C: Serialize + ?Sized> {
    seed: u64,
    config: &'a C,
    alpha: f64,
    cells: Vec<JsonCell<'a>>,
}

#[derive(Serialize)]
struct JsonCell<'a> {
    dataset: &'a str,
    best: bool,
    report: &'a EvalReport,
}

pub fn write_eval_json<W: Write, C: Serialize + ?Sized>(
    mut out: W,
    cells: &[EvalCell],
    seed: u64,
    config: &C,
    alpha: f64,
) -> Result<()> {
    let flags = best_flags(cells, alpha);
    let doc = EvalDocument {
        seed,
        config,
        alpha,
        cells: cells
            .iter()
            .zip(flags)
            .map(|(c, best)| JsonCell {
                dataset: &c.dataset,
                best,
                report: &c.report,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out).map_err(io_err)?;
    Ok(())
}

/// Feature matrix with missing values as empty cells.
pub fn write_feature_csv<W: Write, C: Serialize + ?Sized>(
    mut out: W,
    ids: &[String],
    labels: &[Label],
    names: &[String],
    rows: &[Vec<Option<f64>>],
    seed: u64,
    config: &C,
) -> Result<()> {
    writeln!(out, "{}", header_line(seed, config)?).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["grant_id".to_string(), "label".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for ((id, label), row) in ids.iter().zip(labels).zip(rows) {
        let mut rec = vec![id.clone(), label.index().to_string()];
        rec.extend(row.iter().map(|v| v.map_or(String::new(), |x| x.to_string())));
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Ranking table: feature, mean importance, average rank, CD flag.
pub fn write_relevance_csv<W: Write>(mut out: W, report: &FeatureRelevanceReport) -> Result<()> {
    writeln!(out, "{}", header_line(report.config.settings.base_seed, &report.config)?).map_err(io_err)?;
    writeln!(
        out,
        "# critical_difference={} n_datasets={}",
        report.critical_difference.map_or("none".to_string(), fmt4),
        report.n_datasets
    )
    .map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["position", "feature", "mean_importance", "node_count", "average_rank", "differs_from_best"])?;
    for (i, row) in report.rows.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            row.feature.clone(),
            fmt4(row.mean_importance),
            row.node_count.to_string(),
            fmt4(row.average_rank),
            row.differs_from_best.map_or(String::new(), |b| b.to_string()),
        ])?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Number of features labelled in the rank diagram.
pub const LABELLED_FEATURES: usize = 5;

/// Horizontal average-rank axis with one marker per feature, the best five
/// labelled and the critical difference drawn as a bar from rank 1.
/// `timestamp` adds a generation comment.
pub fn render_rank_svg(report: &FeatureRelevanceReport, timestamp: Option<&str>) -> Result<String> {
    let k = report.rows.len().max(1);
    let (width, left, right) = (900.0, 60.0, 60.0);
    let axis_y = 110.0;
    let label_rows = report.rows.len().min(LABELLED_FEATURES);
    let height = axis_y + 40.0 + 22.0 * label_rows as f64;
    let span = (k.max(2) - 1) as f64;
    let x_of = |rank: f64| left + (rank - 1.0) / span * (width - left - right);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let header = header_line(report.config.settings.base_seed, &report.config)?;
    let _ = writeln!(s, "<!-- {} -->", header.trim_start_matches("# ").replace("--", "- -"));
    if let Some(ts) = timestamp {
        let _ = writeln!(s, "<!-- generated {} -->", ts.replace("--", "- -"));
    }
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{axis_y}" x2="{:.2}" y2="{axis_y}" stroke="black"/>"#,
        x_of(1.0),
        x_of(k as f64)
    );
    let step = (k as f64 / 10.0).ceil().max(1.0) as usize;
    let mut ticks: Vec<usize> = (1..=k).step_by(step).collect();
    if ticks.last() != Some(&k) {
        ticks.push(k);
    }
    for t in ticks {
        let x = x_of(t as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{axis_y}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
            axis_y - 6.0,
            axis_y - 10.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">average rank</text>"#,
        width / 2.0,
        axis_y - 30.0
    );
    if let Some(cd) = report.critical_difference {
        let (x1, x2) = (x_of(1.0), x_of((1.0 + cd).min(k as f64)));
        let y = 30.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.2}" y1="{y}" x2="{x2:.2}" y2="{y}" stroke="black" stroke-width="2"/><line x1="{x1:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="black"/><line x1="{x2:.2}" y1="{:.2}" x2="{x2:.2}" y2="{:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="middle">CD = {}</text>"#,
            y - 4.0,
            y + 4.0,
            y - 4.0,
            y + 4.0,
            (x1 + x2) / 2.0,
            y - 8.0,
            fmt4(cd)
        );
    }
    for row in &report.rows {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{axis_y}" r="3" fill="black"><title>{} ({})</title></circle>"#,
            x_of(row.average_rank),
            xml_escape(&row.feature),
            fmt4(row.average_rank)
        );
    }
    for (i, row) in report.rows.iter().take(label_rows).enumerate() {
        let x = x_of(row.average_rank);
        let y = axis_y + 30.0 + 22.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<polyline points="{x:.2},{axis_y} {x:.2},{y:.2} {:.2},{y:.2}" fill="none" stroke="gray"/><text x="{:.2}" y="{:.2}">{}. {} ({})</text>"#,
            x + 10.0,
            x + 14.0,
            y + 4.0,
            i + 1,
            xml_escape(&row.feature),
            fmt4(row.average_rank)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
