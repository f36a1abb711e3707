//! Balanced-resample x stratified k-fold evaluation.
//!
//! Resample `r` uses seed `derive_seed(base, Resample, r)` and its folds use
//! `derive_seed(base, Folds, r)`. The model of cell `(r, f)` is trained with
//! `derive_seed(base, Model, r * k + f)`. Vocabularies and imputation medians
//! are fitted on the cell's training rows only; standardization happens
//! inside the models, also on training rows only.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{significance_pvalue, Confusion};
use super::preprocess::MedianImputer;
use super::{train, Algorithm, FeatureMatrix, Hyperparameters};
use crate::complexity::{extract_complexity_vector, FeatureSchema};
use crate::corpus::{repeat_resamples, GrantRecord, Label};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, Stream};
use crate::textproc::{Language, LexiconSet};
use crate::topical::{
    field_text, fit_vocabulary_tokens, vectorize_tokens, word_tokens, FieldSelector, IdfVariant,
    SparseVector, Vocabulary, WeightingMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    Complexity,
    Tfidf,
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureFamily::Complexity => "complexity",
            FeatureFamily::Tfidf => "tfidf",
        })
    }
}

/// Text the complexity metrics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityText {
    #[default]
    Abstract,
    /// `"<title>. <abstract>"`.
    TitleAbstract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabularyScope {
    /// Refit on every training split.
    #[default]
    TrainingFolds,
    /// Fit once on all included records.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FeatureConfig {
    Complexity {
        language: Language,
        text: ComplexityText,
    },
    Tfidf {
        language: Language,
        field: FieldSelector,
        top_x: usize,
        weighting: WeightingMode,
        idf: IdfVariant,
        vocabulary_scope: VocabularyScope,
    },
}

impl FeatureConfig {
    pub fn family(&self) -> FeatureFamily {
        match self {
            FeatureConfig::Complexity { .. } => FeatureFamily::Complexity,
            FeatureConfig::Tfidf { .. } => FeatureFamily::Tfidf,
        }
    }

    pub fn language(&self) -> Language {
        match self {
            FeatureConfig::Complexity { language, .. } | FeatureConfig::Tfidf { language, .. } => *language,
        }
    }

    /// Short dataset label such as `complexity/pt` or `tfidf/en/abstract/1100`.
    pub fn label(&self) -> String {
        match self {
            FeatureConfig::Complexity { language, text } => match text {
                ComplexityText::Abstract => format!("complexity/{language}"),
                ComplexityText::TitleAbstract => format!("complexity/{language}/title+abstract"),
            },
            FeatureConfig::Tfidf {
                language,
                field,
                top_x,
                ..
            } => format!("tfidf/{language}/{field}/{top_x}"),
        }
    }
}

fn complexity_source(record: &GrantRecord, language: Language, text: ComplexityText) -> Result<String> {
    let abstract_text = field_text(record, FieldSelector::Abstract, language)?;
    Ok(match text {
        ComplexityText::Abstract => abstract_text,
        ComplexityText::TitleAbstract => {
            format!("{}. {}", field_text(record, FieldSelector::Title, language)?, abstract_text)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PreparedFeatures {
    /// Raw metric values, `None` where undefined.
    Complexity { values: Vec<Vec<Option<f64>>> },
    Tokens {
        docs: Vec<Vec<String>>,
        global_vocabulary: Option<Vocabulary>,
    },
}

/// Records turned into per-record raw features, before any fitted transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCorpus {
    pub config: FeatureConfig,
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub features: PreparedFeatures,
    /// `(grant_id, reason)` for records left out.
    pub excluded: Vec<(String, String)>,
}

/// Data-dependent transform fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub enum FoldTransform {
    Imputer(MedianImputer),
    Vocabulary(Vocabulary),
}

/// Featurizes records. Records lacking the configured language's text, or
/// whose text has no word, are excluded and listed.
pub fn prepare(records: &[GrantRecord], config: &FeatureConfig, lexicons: &LexiconSet) -> Result<PreparedCorpus> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let language = config.language();
    if lexicons.language != language {
        return Err(Error::InvalidParameter(format!(
            "lexicons are for `{}` but features are configured for `{language}`",
            lexicons.language
        )));
    }
    enum Row {
        Values(Vec<Option<f64>>),
        Tokens(Vec<String>),
    }
    let rows: Vec<std::result::Result<Row, String>> = records
        .par_iter()
        .map(|r| {
            let outcome = match config {
                FeatureConfig::Complexity { text, .. } => complexity_source(r, language, *text)
                    .and_then(|t| extract_complexity_vector(&r.grant_id, &t, lexicons))
                    .map(|v| Row::Values(v.values())),
                FeatureConfig::Tfidf { field, .. } => {
                    field_text(r, *field, language).map(|t| Row::Tokens(word_tokens(&t)))
                }
            };
            outcome.map_err(|e| e.to_string())
        })
        .collect();

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut docs = Vec::new();
    let mut excluded = Vec::new();
    for (record, row) in records.iter().zip(rows) {
        match row {
            Ok(row) => {
                ids.push(record.grant_id.clone());
                labels.push(record.label());
                match row {
                    Row::Values(v) => values.push(v),
                    Row::Tokens(t) => docs.push(t),
                }
            }
            Err(reason) => {
                log::warn!("excluding {}: {reason}", record.grant_id);
                excluded.push((record.grant_id.clone(), reason));
            }
        }
    }
    if ids.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let features = match config {
        FeatureConfig::Complexity { .. } => PreparedFeatures::Complexity { values },
        FeatureConfig::Tfidf {
            top_x,
            vocabulary_scope,
            ..
        } => {
            let global_vocabulary = match vocabulary_scope {
                VocabularyScope::Global => Some(fit_vocabulary_tokens(&docs, *top_x)?),
                VocabularyScope::TrainingFolds => None,
            };
            PreparedFeatures::Tokens {
                docs,
                global_vocabulary,
            }
        }
    };
    Ok(PreparedCorpus {
        config: config.clone(),
        ids,
        labels,
        features,
        excluded,
    })
}

impl PreparedCorpus {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Fits the fold transform from the rows in `train` alone. Labels are
    /// never read.
    pub fn fit_transform(&self, train: &[usize]) -> Result<FoldTransform> {
        match (&self.features, &self.config) {
            (PreparedFeatures::Complexity { values }, _) => {
                let rows: Vec<&[Option<f64>]> = train.iter().map(|&i| values[i].as_slice()).collect();
                Ok(FoldTransform::Imputer(MedianImputer::fit(&rows, FeatureSchema::complexity().len())))
            }
            (
                PreparedFeatures::Tokens {
                    global_vocabulary: Some(v),
                    ..
                },
                _,
            ) => Ok(FoldTransform::Vocabulary(v.clone())),
            (PreparedFeatures::Tokens { docs, .. }, FeatureConfig::Tfidf { top_x, .. }) => {
                let subset: Vec<Vec<String>> = train.iter().map(|&i| docs[i].clone()).collect();
                Ok(FoldTransform::Vocabulary(fit_vocabulary_tokens(&subset, *top_x)?))
            }
            (PreparedFeatures::Tokens { .. }, FeatureConfig::Complexity { .. }) => {
                unreachable!("token features only come from a tf-idf config")
            }
        }
    }

    /// Feature matrix of the rows in `indices` under a fitted transform.
    pub fn matrix(&self, transform: &FoldTransform, indices: &[usize]) -> Result<FeatureMatrix> {
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        match (&self.features, transform) {
            (PreparedFeatures::Complexity { values }, FoldTransform::Imputer(imp)) => {
                let rows = indices
                    .iter()
                    .map(|&i| SparseVector::from_dense(&imp.transform(&values[i])))
                    .collect();
                let names = FeatureSchema::complexity().names().into_iter().map(String::from).collect();
                FeatureMatrix::new(ids, rows, labels, names)
            }
            (PreparedFeatures::Tokens { docs, .. }, FoldTransform::Vocabulary(vocab)) => {
                let (weighting, idf) = match &self.config {
                    FeatureConfig::Tfidf { weighting, idf, .. } => (*weighting, *idf),
                    FeatureConfig::Complexity { .. } => unreachable!("token features only come from a tf-idf config"),
                };
                let rows = indices
                    .iter()
                    .map(|&i| vectorize_tokens(&docs[i], vocab, weighting, idf))
                    .collect();
                let names = vocab.words().into_iter().map(String::from).collect();
                FeatureMatrix::new(ids, rows, labels, names)
            }
            _ => Err(Error::SchemaMismatch("transform does not match the prepared features".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSettings {
    pub k: usize,
    pub n_resamples: usize,
    pub base_seed: u64,
}

impl CvSettings {
    pub fn new(base_seed: u64) -> Self {
        CvSettings {
            k: 10,
            n_resamples: 10,
            base_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub features: FeatureConfig,
    pub hyperparameters: Hyperparameters,
    pub k: usize,
    pub n_resamples: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub algorithm: Algorithm,
    pub n_records: usize,
    pub n_excluded: usize,
    /// Positive-class F1 per (resample, fold), resample-major.
    pub per_run_f1: Vec<f64>,
    pub per_run_macro_f1: Vec<f64>,
    pub mean_f1: f64,
    /// Population SD of `per_run_f1`.
    pub sd_f1: f64,
    pub mean_macro_f1: f64,
    /// F1 of the confusion counts pooled over every cell.
    pub pooled_f1: f64,
    pub n_correct_total: usize,
    pub n_total: usize,
    /// Mean correct predictions per balanced dataset, rounded.
    pub n_correct_per_dataset: usize,
    pub n_per_dataset: usize,
    pub p_dominant: f64,
    /// Binomial tail of `n_correct_per_dataset` out of `n_per_dataset`.
    pub p_value: f64,
    pub model_fingerprints: Vec<String>,
}

impl EvalReport {
    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn population_sd(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

struct CellOutcome {
    confusion: Confusion,
    fingerprint: String,
}

pub fn cross_validate(
    records: &[GrantRecord],
    features: &FeatureConfig,
    hyper: &Hyperparameters,
    settings: &CvSettings,
    lexicons: &LexiconSet,
) -> Result<EvalReport> {
    let prepared = prepare(records, features, lexicons)?;
    cross_validate_prepared(&prepared, hyper, settings)
}

pub fn cross_validate_prepared(
    prepared: &PreparedCorpus,
    hyper: &Hyperparameters,
    settings: &CvSettings,
) -> Result<EvalReport> {
    let CvSettings {
        k,
        n_resamples,
        base_seed,
    } = *settings;
    if n_resamples == 0 {
        return Err(Error::InvalidParameter("n_resamples must be at least 1".into()));
    }
    let resamples = repeat_resamples(&prepared.labels, n_resamples, base_seed)?;
    let folds = resamples
        .iter()
        .enumerate()
        .map(|(r, ds)| ds.stratified_kfold(k, derive_seed(base_seed, Stream::Folds, r as u64)))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..n_resamples).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    let outcomes = cells
        .par_iter()
        .map(|&(r, f)| {
            let source = |positions: Vec<usize>| -> Vec<usize> {
                positions.into_iter().map(|p| resamples[r].instances[p].index).collect()
            };
            let train_idx = source(folds[r].train_indices(f));
            let test_idx = source(folds[r].test_indices(f));
            let transform = prepared.fit_transform(&train_idx)?;
            let train_m = prepared.matrix(&transform, &train_idx)?;
            let test_m = prepared.matrix(&transform, &test_idx)?;
            let seed = derive_seed(base_seed, Stream::Model, (r * k + f) as u64);
            let model = train(&train_m, hyper, seed)?;
            let predictions = model.predict_matrix(&test_m);
            Ok(CellOutcome {
                confusion: Confusion::from_predictions(&predictions, &test_m.labels, Label::Productive)?,
                fingerprint: model.fingerprint,
            })
        })
        .collect::<Result<Vec<CellOutcome>>>()?;

    let per_run_f1: Vec<f64> = outcomes.iter().map(|o| o.confusion.f1()).collect();
    let per_run_macro_f1: Vec<f64> = outcomes
        .iter()
        .map(|o| (o.confusion.f1() + o.confusion.flipped().f1()) / 2.0)
        .collect();
    let pooled = outcomes
        .iter()
        .fold(Confusion::default(), |acc, o| acc.merge(&o.confusion));
    let n_correct_total = pooled.correct();
    let n_total = pooled.total();
    let n_per_dataset = resamples[0].len();
    let n_correct_per_dataset = (n_correct_total as f64 / n_resamples as f64).round() as usize;
    let dominant = Label::BOTH
        .iter()
        .map(|&l| resamples[0].count(l))
        .max()
        .unwrap_or(0);
    let p_dominant = dominant as f64 / n_per_dataset as f64;

    Ok(EvalReport {
        config: EvalConfig {
            features: prepared.config.clone(),
            hyperparameters: hyper.clone(),
            k,
            n_resamples,
            base_seed,
        },
        algorithm: hyper.algorithm(),
        n_records: prepared.len(),
        n_excluded: prepared.excluded.len(),
        mean_f1: mean(&per_run_f1),
        sd_f1: population_sd(&per_run_f1),
        mean_macro_f1: mean(&per_run_macro_f1),
        pooled_f1: pooled.f1(),
        per_run_f1,
        per_run_macro_f1,
        n_correct_total,
        n_total,
        n_correct_per_dataset,
        n_per_dataset,
        p_dominant,
        p_value: significance_pvalue(n_correct_per_dataset, n_per_dataset, p_dominant)?,
        model_fingerprints: outcomes.into_iter().map(|o| o.fingerprint).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Area;
    use crate::ml::tree::TreeParams;

    fn record(i: usize, text: &str, pubs: u32) -> GrantRecord {
        GrantRecord {
            grant_id: format!("2010/{i:05}-0"),
            title_pt: format!("Projeto {i}"),
            abstract_pt: text.to_string(),
            title_en: None,
            abstract_en: None,
            subject: vec![],
            area: Area::Med,
            year: 2010,
            publication_count: pubs,
        }
    }

    fn toy() -> Vec<GrantRecord> {
        (0..12)
            .map(|i| {
                if i % 2 == 0 {
                    record(i, "gato gato peixe estudo.", 2)
                } else {
                    record(i, "cão rato estudo estudo.", 0)
                }
            })
            .collect()
    }

    fn tfidf() -> FeatureConfig {
        FeatureConfig::Tfidf {
            language: Language::Pt,
            field: FieldSelector::Abstract,
            top_x: 50,
            weighting: WeightingMode::Tfidf,
            idf: IdfVariant::LogRatio,
            vocabulary_scope: VocabularyScope::TrainingFolds,
        }
    }

    #[test]
    fn shape_contract() {
        let lex = LexiconSet::builtin(Language::Pt);
        let settings = CvSettings {
            k: 2,
            n_resamples: 1,
            base_seed: 3,
        };
        let report = cross_validate(&toy(), &tfidf(), &Hyperparameters::Dtree(TreeParams::default()), &settings, &lex).unwrap();
        assert_eq!(report.per_run_f1.len(), 2);
        assert_eq!(report.mean_f1, 1.0);
        assert_eq!(report.n_total, 12);
        assert_eq!(report.p_dominant, 0.5);
    }

    #[test]
    fn english_runs_exclude_records_without_english_text() {
        let lex = LexiconSet::builtin(Language::En);
        let mut records = toy();
        for r in records.iter_mut().take(6) {
            r.abstract_en = Some("A cat studies fish.".into());
        }
        let cfg = FeatureConfig::Complexity {
            language: Language::En,
            text: ComplexityText::Abstract,
        };
        let p = prepare(&records, &cfg, &lex).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.excluded.len(), 6);
        assert!(prepare(&records, &cfg, &LexiconSet::builtin(Language::Pt)).is_err());
    }

    #[test]
    fn vocabulary_uses_training_rows_only() {
        let lex = LexiconSet::builtin(Language::Pt);
        let p = prepare(&toy(), &tfidf(), &lex).unwrap();
        let FoldTransform::Vocabulary(v) = p.fit_transform(&[1, 3]).unwrap() else {
            panic!("expected a vocabulary");
        };
        assert_eq!(v.corpus_size, 2);
        assert!(!v.entries.contains_key("gato"));
    }

    #[test]
    fn population_sd_of_constant_is_zero() {
        assert_eq!(population_sd(&[0.5, 0.5]), 0.0);
        assert_eq!(population_sd(&[0.0, 1.0]), 0.5);
    }
}
