use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use grantscope_core::complexity::FeatureSchema;
use grantscope_core::corpus::{self, productivity_histogram, GrantRecord};
use grantscope_core::ml::cv::{FoldTransform, PreparedFeatures};
use grantscope_core::ml::{cross_validate_prepared, prepare, CvSettings, FeatureConfig, PreparedCorpus, VocabularyScope};
use grantscope_core::relevance::{relevance_analysis, RelevanceSettings};
use grantscope_core::report::{self, EvalCell};
use grantscope_core::{Area, LexiconSet};

use crate::config::RunConfig;
use crate::{Invalid, PartialFailure};

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_records(cfg: &RunConfig) -> anyhow::Result<Vec<GrantRecord>> {
    let mut records = corpus::load_corpus(&cfg.input, cfg.format)?;
    if let Some(area) = cfg.area {
        records.retain(|r| r.area == area);
    }
    if records.is_empty() {
        return Err(grantscope_core::Error::EmptyCorpus.into());
    }
    Ok(records)
}

fn load_lexicons(cfg: &RunConfig) -> anyhow::Result<LexiconSet> {
    Ok(match &cfg.lexicons {
        None => LexiconSet::builtin(cfg.language),
        Some(dir) => {
            if !dir.is_dir() {
                return Err(Invalid(format!("lexicon directory {} does not exist", dir.display())).into());
            }
            let per_language = dir.join(cfg.language.as_str());
            let dir = if per_language.is_dir() { per_language } else { dir.clone() };
            LexiconSet::from_dir(cfg.language, &dir)?
        }
    })
}

fn dataset_label(cfg: &RunConfig, features: &FeatureConfig) -> String {
    match cfg.area {
        Some(area) => format!("{}/{area}", features.label()),
        None => features.label(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub output: PathBuf,
}

/// Validates the input and writes it as canonical JSONL.
pub fn ingest(cfg: &RunConfig) -> anyhow::Result<IngestSummary> {
    let report = corpus::ingest(&cfg.input, cfg.format)?;
    for r in &report.rejected {
        eprintln!("rejected {r}");
    }
    println!("accepted {} record(s), rejected {}", report.records.len(), report.rejected.len());
    if report.records.is_empty() {
        return Err(Invalid(format!("no valid records in {}", cfg.input.display())).into());
    }
    let output = cfg.out.join("corpus.jsonl");
    if output == cfg.input {
        return Err(Invalid("ingest would overwrite its own input; choose another --out".into()).into());
    }
    let mut w = create(&output)?;
    corpus::write_jsonl(&report.records, &mut w)?;
    w.flush()?;
    Ok(IngestSummary {
        accepted: report.records.len(),
        rejected: report.rejected.len(),
        output,
    })
}

/// Positive-class percentage and cumulative publication-count fractions, one
/// column per area present plus an overall column.
pub fn stats_table(records: &[GrantRecord]) -> anyhow::Result<String> {
    let mut groups: BTreeMap<Area, Vec<GrantRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.area).or_default().push(r.clone());
    }
    let mut columns = Vec::new();
    for (area, group) in &groups {
        columns.push((area.to_string(), productivity_histogram(group)?));
    }
    if groups.len() > 1 {
        columns.push(("ALL".to_string(), productivity_histogram(records)?));
    }
    let mut s = String::new();
    let header: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    let _ = writeln!(s, "#P\t{}", header.join("\t"));
    let row = |label: String, values: Vec<String>| format!("{label}\t{}\n", values.join("\t"));
    let pct = |f: f64| format!("{:.1}%", 100.0 * f);
    s.push_str(&row("n".into(), columns.iter().map(|(_, h)| h.total.to_string()).collect()));
    s.push_str(&row("1+".into(), columns.iter().map(|(_, h)| pct(h.positive_fraction)).collect()));
    for (i, (threshold, _)) in columns[0].1.rows.iter().enumerate() {
        s.push_str(&row(format!("{threshold}+"), columns.iter().map(|(_, h)| pct(h.rows[i].1)).collect()));
    }
    Ok(s)
}

pub fn stats(cfg: &RunConfig) -> anyhow::Result<String> {
    let table = stats_table(&load_records(cfg)?)?;
    print!("{table}");
    Ok(table)
}

fn prepared(cfg: &RunConfig, features: &FeatureConfig) -> anyhow::Result<PreparedCorpus> {
    let records = load_records(cfg)?;
    let lexicons = load_lexicons(cfg)?;
    let prepared = prepare(&records, features, &lexicons)?;
    if !prepared.excluded.is_empty() {
        log::warn!(
            "{} of {} record(s) excluded from {}",
            prepared.excluded.len(),
            records.len(),
            features.label()
        );
    }
    Ok(prepared)
}

/// Writes `features.csv`, plus `vocabulary.tsv` for tf-idf features fitted
/// on every included record.
pub fn featurize(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let seed = cfg.require_seed()?;
    let features = cfg.feature_config();
    let prepared = prepared(cfg, &features)?;
    let echo = cfg.echo("featurize", features, Vec::new());
    let (names, rows): (Vec<String>, Vec<Vec<Option<f64>>>) = match &prepared.features {
        PreparedFeatures::Complexity { values } => (
            FeatureSchema::complexity().names().into_iter().map(str::to_string).collect(),
            values.clone(),
        ),
        PreparedFeatures::Tokens { .. } => {
            let all: Vec<usize> = (0..prepared.len()).collect();
            let transform = prepared.fit_transform(&all)?;
            if let FoldTransform::Vocabulary(v) = &transform {
                let mut w = create(&cfg.out.join("vocabulary.tsv"))?;
                v.write_tsv(&mut w)?;
                w.flush()?;
            }
            let m = prepared.matrix(&transform, &all)?;
            let d = m.n_features();
            let rows = m.rows.iter().map(|r| r.to_dense(d).into_iter().map(Some).collect()).collect();
            (m.feature_names, rows)
        }
    };
    let path = cfg.out.join("features.csv");
    let mut w = create(&path)?;
    report::write_feature_csv(&mut w, &prepared.ids, &prepared.labels, &names, &rows, seed, &echo)?;
    w.flush()?;
    println!("wrote {} ({} rows x {} features)", path.display(), rows.len(), names.len());
    Ok(path)
}

#[derive(Debug, Serialize)]
struct FailureEntry {
    dataset: String,
    algorithm: String,
    error: String,
}

/// Cross-validates every configured algorithm and writes `eval.csv` and
/// `eval.json`. Cells that fail are listed in `failures.json` while the
/// successful ones are still written.
pub fn evaluate(cfg: &RunConfig) -> anyhow::Result<Vec<EvalCell>> {
    let seed = cfg.require_seed()?;
    let features = cfg.feature_config();
    let prepared = prepared(cfg, &features)?;
    let dataset = dataset_label(cfg, &features);
    let settings = CvSettings {
        k: cfg.folds,
        n_resamples: cfg.resamples,
        base_seed: seed,
    };
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for &algorithm in &cfg.algorithms {
        let hyper = algorithm.default_hyperparameters(features.family());
        log::info!("evaluating {algorithm} on {dataset}");
        match cross_validate_prepared(&prepared, &hyper, &settings) {
            Ok(report) => cells.push(EvalCell {
                dataset: dataset.clone(),
                report,
            }),
            Err(e) => failures.push(FailureEntry {
                dataset: dataset.clone(),
                algorithm: algorithm.to_string(),
                error: e.to_string(),
            }),
        }
    }

    let echo = cfg.echo("evaluate", features, cfg.algorithms.clone());
    let alpha = cfg.alpha.value();
    let mut w = create(&cfg.out.join("eval.csv"))?;
    report::write_eval_csv(&mut w, &cells, seed, &echo, alpha)?;
    w.flush()?;
    let mut w = create(&cfg.out.join("eval.json"))?;
    report::write_eval_json(&mut w, &cells, seed, &echo, alpha)?;
    w.flush()?;
    let manifest = cfg.out.join("failures.json");
    if failures.is_empty() {
        if manifest.exists() {
            fs::remove_file(&manifest)?;
        }
    } else {
        let mut w = create(&manifest)?;
        serde_json::to_writer_pretty(&mut w, &failures)?;
        writeln!(w)?;
        w.flush()?;
    }

    for (cell, best) in cells.iter().zip(report::best_flags(&cells, alpha)) {
        let r = &cell.report;
        println!(
            "{}\t{}\tF1 {} +- {}\tp {}{}",
            cell.dataset,
            r.algorithm,
            report::fmt4(r.mean_f1),
            report::fmt4(r.sd_f1),
            report::fmt_p(r.p_value),
            if best { "\t*" } else { "" }
        );
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("failed {} on {}: {}", f.algorithm, f.dataset, f.error);
        }
        return Err(PartialFailure {
            failed: failures.len(),
            total: cfg.algorithms.len(),
            manifest,
        }
        .into());
    }
    Ok(cells)
}

/// Writes `relevance.csv` and `relevance.svg`.
pub fn relevance(cfg: &RunConfig) -> anyhow::Result<grantscope_core::FeatureRelevanceReport> {
    let seed = cfg.require_seed()?;
    let mut features = cfg.feature_config();
    // Per-resample vocabularies would give each forest different columns.
    if let FeatureConfig::Tfidf { vocabulary_scope, .. } = &mut features {
        *vocabulary_scope = VocabularyScope::Global;
    }
    let prepared = prepared(cfg, &features)?;
    let mut settings = RelevanceSettings::new(seed);
    settings.n_resamples = cfg.resamples;
    settings.forest.n_trees = cfg.trees;
    settings.weighting = cfg.importance;
    settings.alpha = cfg.alpha;
    let result = relevance_analysis(&prepared, &settings)?;

    let mut w = create(&cfg.out.join("relevance.csv"))?;
    report::write_relevance_csv(&mut w, &result)?;
    w.flush()?;
    let stamp = cfg.timestamp.then(timestamp);
    let svg = report::render_rank_svg(&result, stamp.as_deref())?;
    let mut w = create(&cfg.out.join("relevance.svg"))?;
    w.write_all(svg.as_bytes())?;
    w.flush()?;

    for (i, row) in result.rows.iter().take(report::LABELLED_FEATURES).enumerate() {
        println!("{}\t{}\t{}", i + 1, row.feature, report::fmt4(row.average_rank));
    }
    if let Some(cd) = result.critical_difference {
        println!("CD\t{}", report::fmt4(cd));
    }
    Ok(result)
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix-time {secs}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use grantscope_core::synthetic::planted_topic_corpus;

    #[test]
    fn stats_columns_follow_areas() {
        let mut records = planted_topic_corpus(6, 1);
        for (r, c) in records.iter_mut().zip([0, 1, 2, 3, 0, 8]) {
            r.publication_count = c;
        }
        let table = stats_table(&records).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "#P\tMED\tDENT\tVET\tALL");
        assert_eq!(lines[1], "n\t2\t2\t2\t6");
        // MED holds counts 0 and 3, DENT 1 and 0, VET 2 and 8.
        assert_eq!(lines[2], "1+\t50.0%\t50.0%\t100.0%\t66.7%");
        assert_eq!(lines[3], "2+\t50.0%\t0.0%\t100.0%\t50.0%");
        assert_eq!(lines.last().unwrap(), &"8+\t0.0%\t0.0%\t50.0%\t16.7%");
    }

    #[test]
    fn single_area_has_one_column() {
        let records: Vec<_> = planted_topic_corpus(9, 1).into_iter().filter(|r| r.area == Area::Vet).collect();
        let table = stats_table(&records).unwrap();
        assert!(table.starts_with("#P\tVET\n"));
    }
}
