use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use grantscope_bench::{complexity_prepared, full_matrix, topic_prepared};
use grantscope_core::complexity::extract_complexity_vector;
use grantscope_core::ml::{cross_validate_prepared, train, Algorithm, CvSettings, FeatureFamily};
use grantscope_core::relevance::{relevance_analysis, RelevanceSettings};
use grantscope_core::synthetic::{planted_complexity_corpus, planted_topic_corpus};
use grantscope_core::textproc::analyze;
use grantscope_core::topical::{fit_vocabulary, vectorize, FieldSelector, WeightingMode};
use grantscope_core::{Language, LexiconSet};

fn text(c: &mut Criterion) {
    let lex = LexiconSet::builtin(Language::Pt);
    let records = planted_complexity_corpus(200, 2);
    c.bench_function("analyze 200 abstracts", |b| {
        b.iter(|| {
            for r in &records {
                black_box(analyze(&r.abstract_pt, &lex));
            }
        })
    });
    c.bench_function("complexity vectors 200 abstracts", |b| {
        b.iter(|| {
            for r in &records {
                black_box(extract_complexity_vector(&r.grant_id, &r.abstract_pt, &lex).unwrap());
            }
        })
    });
    let topic = planted_topic_corpus(400, 1);
    c.bench_function("fit vocabulary 400 abstracts", |b| {
        b.iter(|| black_box(fit_vocabulary(&topic, FieldSelector::Abstract, 1100, Language::Pt).unwrap()))
    });
    let vocab = fit_vocabulary(&topic, FieldSelector::Abstract, 1100, Language::Pt).unwrap();
    c.bench_function("vectorize 400 abstracts", |b| {
        b.iter(|| {
            for r in &topic {
                black_box(vectorize(&r.abstract_pt, &vocab, WeightingMode::Tfidf));
            }
        })
    });
}

fn training(c: &mut Criterion) {
    let tfidf = full_matrix(&topic_prepared(400, 1100));
    let complexity = full_matrix(&complexity_prepared(400));
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for algorithm in Algorithm::ALL {
        for (family, m) in [(FeatureFamily::Tfidf, &tfidf), (FeatureFamily::Complexity, &complexity)] {
            let hyper = algorithm.default_hyperparameters(family);
            group.bench_function(format!("{algorithm}/{family}"), |b| {
                b.iter(|| black_box(train(m, &hyper, 1).unwrap()))
            });
        }
    }
    group.finish();
}

fn protocol(c: &mut Criterion) {
    let prepared = topic_prepared(200, 300);
    let complexity = complexity_prepared(200);
    let mut group = c.benchmark_group("protocol");
    group.sample_size(10);
    let hyper = Algorithm::Dtree.default_hyperparameters(FeatureFamily::Tfidf);
    group.bench_function("cross_validate dtree tfidf 200x10x10", |b| {
        b.iter(|| black_box(cross_validate_prepared(&prepared, &hyper, &CvSettings::new(3)).unwrap()))
    });
    group.bench_function("relevance complexity 200 records 3 resamples", |b| {
        b.iter_batched(
            || {
                let mut s = RelevanceSettings::new(5);
                s.n_resamples = 3;
                s.forest.n_trees = 30;
                s
            },
            |s| black_box(relevance_analysis(&complexity, &s).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, text, training, protocol);
criterion_main!(benches);
