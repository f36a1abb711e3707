//! Fixtures shared by the criterion benchmarks.

use grantscope_core::ml::{prepare, FeatureConfig, FeatureMatrix, PreparedCorpus, VocabularyScope};
use grantscope_core::synthetic::{planted_complexity_corpus, planted_topic_corpus};
use grantscope_core::topical::{FieldSelector, IdfVariant, WeightingMode};
use grantscope_core::{Language, LexiconSet};

pub fn tfidf_config(top_x: usize) -> FeatureConfig {
    FeatureConfig::Tfidf {
        language: Language::Pt,
        field: FieldSelector::Abstract,
        top_x,
        weighting: WeightingMode::Tfidf,
        idf: IdfVariant::LogRatio,
        vocabulary_scope: VocabularyScope::TrainingFolds,
    }
}

pub fn complexity_config() -> FeatureConfig {
    FeatureConfig::Complexity {
        language: Language::Pt,
        text: Default::default(),
    }
}

/// Planted-topic corpus of `n` records prepared for tf-idf features.
pub fn topic_prepared(n: usize, top_x: usize) -> PreparedCorpus {
    prepare(&planted_topic_corpus(n, 1), &tfidf_config(top_x), &LexiconSet::builtin(Language::Pt))
        .expect("synthetic corpus prepares")
}

/// Planted-complexity corpus of `n` records prepared for complexity features.
pub fn complexity_prepared(n: usize) -> PreparedCorpus {
    prepare(&planted_complexity_corpus(n, 2), &complexity_config(), &LexiconSet::builtin(Language::Pt))
        .expect("synthetic corpus prepares")
}

/// Every record of `prepared` under a transform fitted on all of them.
pub fn full_matrix(prepared: &PreparedCorpus) -> FeatureMatrix {
    let all: Vec<usize> = (0..prepared.len()).collect();
    let transform = prepared.fit_transform(&all).expect("transform fits");
    prepared.matrix(&transform, &all).expect("matrix builds")
}
