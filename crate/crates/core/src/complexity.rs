//! Lexical-complexity metrics over a tagged document.
//!
//! Counts are taken over word tokens only; numbers and punctuation are not
//! words. Metrics that are undefined for a degenerate document (no sentences,
//! no words, too few scored tokens) are `None` and get imputed downstream.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{analyze, LexiconSet, Tag, TaggedDocument, TaggedToken, TokenKind};

/// Exponent of the Brunet index, `beta = v ^ (n ^ BRUNET_EXPONENT)`.
pub const BRUNET_EXPONENT: f64 = -0.165;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Count,
    Ratio,
    Real,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: ValueKind,
}

/// Ordered feature names; column identity for the classifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureSpec>,
}

const COMPLEXITY_FEATURES: [(&str, &str, ValueKind); 18] = [
    ("sentence_count", "number of sentences", ValueKind::Count),
    ("word_count", "number of word tokens", ValueKind::Count),
    ("vocabulary_size", "number of distinct word types", ValueKind::Count),
    ("adjective_count", "number of adjectives", ValueKind::Count),
    ("adverb_count", "number of adverbs", ValueKind::Count),
    ("verb_count", "number of verbs", ValueKind::Count),
    ("noun_count", "number of nouns", ValueKind::Count),
    ("noun_ratio", "nouns per word", ValueKind::Ratio),
    ("words_per_sentence", "mean words per sentence", ValueKind::Real),
    ("logical_operator_count", "logical operator tokens", ValueKind::Count),
    ("function_word_diversity", "function word types / word types", ValueKind::Ratio),
    ("preposition_diversity", "preposition types / word types", ValueKind::Ratio),
    ("punctuation_diversity", "punctuation types / word types", ValueKind::Ratio),
    ("noun_sd", "population SD of nouns per sentence", ValueKind::Real),
    ("brunet_index", "v ^ (n ^ -0.165)", ValueKind::Real),
    ("mean_noun_phrase", "noun phrases per sentence", ValueKind::Real),
    ("concreteness_sd", "population SD of token concreteness", ValueKind::Real),
    ("ne_ratio", "named-entity spans per word", ValueKind::Ratio),
];

impl FeatureSchema {
    pub fn complexity() -> Self {
        FeatureSchema {
            features: COMPLEXITY_FEATURES
                .iter()
                .map(|&(name, description, kind)| FeatureSpec {
                    name,
                    description,
                    kind,
                })
                .collect(),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.features.iter().map(|f| f.name).collect()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BasicCounts {
    pub sentence_count: usize,
    pub word_count: usize,
    pub vocabulary_size: usize,
    pub adjective_count: usize,
    pub adverb_count: usize,
    pub verb_count: usize,
    pub noun_count: usize,
    pub noun_ratio: f64,
    pub words_per_sentence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityVector {
    pub sentence_count: usize,
    pub word_count: usize,
    pub vocabulary_size: usize,
    pub adjective_count: usize,
    pub adverb_count: usize,
    pub verb_count: usize,
    pub noun_count: usize,
    pub noun_ratio: f64,
    pub words_per_sentence: f64,
    pub logical_operator_count: usize,
    pub function_word_diversity: Option<f64>,
    pub preposition_diversity: Option<f64>,
    pub punctuation_diversity: Option<f64>,
    pub noun_sd: Option<f64>,
    pub brunet_index: Option<f64>,
    pub mean_noun_phrase: Option<f64>,
    pub concreteness_sd: Option<f64>,
    pub ne_ratio: Option<f64>,
}

impl ComplexityVector {
    /// Values in [`FeatureSchema::complexity`] order; `None` marks missing.
    pub fn values(&self) -> Vec<Option<f64>> {
        vec![
            Some(self.sentence_count as f64),
            Some(self.word_count as f64),
            Some(self.vocabulary_size as f64),
            Some(self.adjective_count as f64),
            Some(self.adverb_count as f64),
            Some(self.verb_count as f64),
            Some(self.noun_count as f64),
            Some(self.noun_ratio),
            Some(self.words_per_sentence),
            Some(self.logical_operator_count as f64),
            self.function_word_diversity,
            self.preposition_diversity,
            self.punctuation_diversity,
            self.noun_sd,
            self.brunet_index,
            self.mean_noun_phrase,
            self.concreteness_sd,
            self.ne_ratio,
        ]
    }
}

fn count_tag(words: &[&TaggedToken], tag: Tag) -> usize {
    words.iter().filter(|t| t.tag == tag).count()
}

fn vocabulary(doc: &TaggedDocument) -> BTreeSet<&str> {
    doc.words().map(|t| t.token.normalized.as_str()).collect()
}

pub fn basic_counts(doc: &TaggedDocument) -> BasicCounts {
    let words: Vec<&TaggedToken> = doc.words().collect();
    let word_count = words.len();
    let noun_count = count_tag(&words, Tag::Noun);
    BasicCounts {
        sentence_count: doc.sentence_count,
        word_count,
        vocabulary_size: vocabulary(doc).len(),
        adjective_count: count_tag(&words, Tag::Adjective),
        adverb_count: count_tag(&words, Tag::Adverb),
        verb_count: count_tag(&words, Tag::Verb),
        noun_count,
        noun_ratio: if word_count == 0 {
            0.0
        } else {
            noun_count as f64 / word_count as f64
        },
        words_per_sentence: if doc.sentence_count == 0 {
            0.0
        } else {
            word_count as f64 / doc.sentence_count as f64
        },
    }
}

/// Token count (not type count) of logical-operator hits.
pub fn logical_operator_count(doc: &TaggedDocument, lexicons: &LexiconSet) -> usize {
    doc.words()
        .filter(|t| lexicons.logical_operators.contains(&t.token.normalized))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiversityClass {
    FunctionWord,
    Preposition,
    Punctuation,
}

/// Distinct types of the selected class over the word-type vocabulary size.
///
/// Punctuation is never part of the denominator, so the punctuation ratio is
/// capped at 1.
pub fn type_diversity(doc: &TaggedDocument, class: DiversityClass) -> Option<f64> {
    let vocab = vocabulary(doc).len();
    if vocab == 0 {
        return None;
    }
    let types: BTreeSet<&str> = doc
        .tokens
        .iter()
        .filter(|t| match class {
            DiversityClass::FunctionWord => t.is_word() && t.is_function_word,
            DiversityClass::Preposition => t.is_word() && t.tag == Tag::Preposition,
            DiversityClass::Punctuation => t.token.kind == TokenKind::Punctuation,
        })
        .map(|t| t.token.normalized.as_str())
        .collect();
    Some((types.len() as f64 / vocab as f64).min(1.0))
}

/// Population standard deviation; `None` for an empty sample. Values are
/// summed in sorted order so the result does not depend on input order.
pub fn population_sd(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(var.sqrt())
}

pub fn noun_sd(doc: &TaggedDocument) -> Option<f64> {
    let per_sentence: Vec<f64> = doc
        .sentences()
        .iter()
        .map(|s| s.iter().filter(|t| t.is_word() && t.tag == Tag::Noun).count() as f64)
        .collect();
    population_sd(&per_sentence)
}

pub fn brunet_index(word_count: usize, vocabulary_size: usize) -> Option<f64> {
    if word_count == 0 {
        return None;
    }
    let alpha = (word_count as f64).powf(BRUNET_EXPONENT);
    Some((vocabulary_size as f64).powf(alpha))
}

/// Noun-phrase chunks in one sentence: `determiner? adjective* noun+ adjective*`.
///
/// Trailing adjectives cover the Portuguese post-nominal position; they never
/// change the chunk count since a chunk needs at least one noun.
pub fn noun_phrase_chunks(sentence: &[TaggedToken]) -> Vec<std::ops::Range<usize>> {
    let tags: Vec<Tag> = sentence.iter().map(|t| t.tag).collect();
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let mut j = i;
        if tags[j] == Tag::Determiner {
            j += 1;
        }
        while j < tags.len() && tags[j] == Tag::Adjective {
            j += 1;
        }
        let noun_start = j;
        while j < tags.len() && tags[j] == Tag::Noun {
            j += 1;
        }
        if j == noun_start {
            i += 1;
            continue;
        }
        while j < tags.len() && tags[j] == Tag::Adjective {
            j += 1;
        }
        chunks.push(i..j);
        i = j;
    }
    chunks
}

pub fn mean_noun_phrase(doc: &TaggedDocument) -> Option<f64> {
    if doc.sentence_count == 0 {
        return None;
    }
    let total: usize = doc
        .sentences()
        .iter()
        .map(|s| noun_phrase_chunks(s).len())
        .sum();
    Some(total as f64 / doc.sentence_count as f64)
}

/// Per-token population SD of concreteness scores; unscored tokens are
/// skipped and fewer than two scored tokens gives `None`.
pub fn concreteness_sd(doc: &TaggedDocument, lexicons: &LexiconSet) -> Option<f64> {
    let scores: Vec<f64> = doc
        .words()
        .filter_map(|t| lexicons.concreteness.get(&t.token.normalized).copied())
        .collect();
    if scores.len() < 2 {
        return None;
    }
    population_sd(&scores)
}

pub fn ne_ratio(doc: &TaggedDocument) -> Option<f64> {
    let words = doc.words().count();
    if words == 0 {
        return None;
    }
    Some(doc.entity_spans as f64 / words as f64)
}

/// All metrics over an already tagged document.
pub fn complexity_of(doc: &TaggedDocument, lexicons: &LexiconSet) -> ComplexityVector {
    let b = basic_counts(doc);
    ComplexityVector {
        sentence_count: b.sentence_count,
        word_count: b.word_count,
        vocabulary_size: b.vocabulary_size,
        adjective_count: b.adjective_count,
        adverb_count: b.adverb_count,
        verb_count: b.verb_count,
        noun_count: b.noun_count,
        noun_ratio: b.noun_ratio,
        words_per_sentence: b.words_per_sentence,
        logical_operator_count: logical_operator_count(doc, lexicons),
        function_word_diversity: type_diversity(doc, DiversityClass::FunctionWord),
        preposition_diversity: type_diversity(doc, DiversityClass::Preposition),
        punctuation_diversity: type_diversity(doc, DiversityClass::Punctuation),
        noun_sd: noun_sd(doc),
        brunet_index: brunet_index(b.word_count, b.vocabulary_size),
        mean_noun_phrase: mean_noun_phrase(doc),
        concreteness_sd: concreteness_sd(doc, lexicons),
        ne_ratio: ne_ratio(doc),
    }
}

/// Tags `text` and computes every metric. A text without any word token is
/// an error naming `doc_id`.
pub fn extract_complexity_vector(
    doc_id: &str,
    text: &str,
    lexicons: &LexiconSet,
) -> Result<ComplexityVector> {
    let doc = analyze(text, lexicons);
    if doc.words().next().is_none() {
        return Err(Error::EmptyDocument(doc_id.to_string()));
    }
    Ok(complexity_of(&doc, lexicons))
}
