//! Seeded synthetic corpora with known structure, for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{Area, GrantRecord};
use crate::seed::rng_from_seed;

const FILLER: [&str; 40] = [
    "estudo", "análise", "dados", "resultado", "método", "processo", "sistema", "modelo", "efeito",
    "grupo", "amostra", "projeto", "pesquisa", "área", "forma", "parte", "caso", "tempo", "nível",
    "tipo", "uso", "base", "fase", "etapa", "meio", "valor", "fator", "objetivo", "avaliação",
    "controle", "técnica", "condição", "relação", "estrutura", "função", "resposta", "produção",
    "variação", "presença", "aplicação",
];
const TOPIC_PRODUCTIVE: [&str; 8] = [
    "proteína", "gene", "célula", "expressão", "receptor", "enzima", "sequência", "mutação",
];
const TOPIC_ZERO: [&str; 8] = [
    "gestão", "currículo", "escola", "política", "comunidade", "serviço", "atenção", "formação",
];

/// `n_docs` records, alternating productive / zero publications, whose
/// abstracts draw a quarter of their words from a class-specific topic list
/// and the rest from shared filler.
pub fn planted_topic_corpus(n_docs: usize, seed: u64) -> Vec<GrantRecord> {
    let mut rng = rng_from_seed(seed);
    (0..n_docs)
        .map(|i| {
            let productive = i % 2 == 0;
            let topic: &[&str] = if productive { &TOPIC_PRODUCTIVE } else { &TOPIC_ZERO };
            let n_words = rng.gen_range(30..=50);
            let words: Vec<&str> = (0..n_words)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        *topic.choose(&mut rng).expect("non-empty")
                    } else {
                        *FILLER.choose(&mut rng).expect("non-empty")
                    }
                })
                .collect();
            record(i, &sentences(&words, &mut rng), u32::from(productive) * rng.gen_range(1..=5))
        })
        .collect()
}

/// The same texts with publication counts permuted by `seed`, so labels are
/// independent of the text.
pub fn shuffled_labels(records: &[GrantRecord], seed: u64) -> Vec<GrantRecord> {
    let mut rng = rng_from_seed(seed);
    let mut counts: Vec<u32> = records.iter().map(|r| r.publication_count).collect();
    counts.shuffle(&mut rng);
    records
        .iter()
        .zip(counts)
        .map(|(r, c)| GrantRecord {
            publication_count: c,
            ..r.clone()
        })
        .collect()
}

/// Complexity feature that separates the classes of
/// [`planted_complexity_corpus`].
pub const PLANTED_COMPLEXITY_FEATURE: &str = "logical_operator_count";

const DETERMINERS: [&str; 4] = ["o", "um", "este", "cada"];
const NOUNS: [&str; 12] = [
    "gato", "rato", "paciente", "tecido", "animal", "hospital", "cão", "osso", "modelo", "grupo",
    "dente", "sangue",
];
const VERBS: [&str; 8] = ["estuda", "avalia", "analisa", "investiga", "apresenta", "permite", "utiliza", "busca"];
const ADJECTIVES: [&str; 8] = ["novo", "grande", "importante", "clínico", "principal", "diferente", "humano", "experimental"];
const PREPOSITIONS: [&str; 4] = ["em", "sobre", "para", "com"];
const OPERATORS: [&str; 2] = ["e", "ou"];

/// Alternating productive / zero records whose abstracts differ only in
/// that productive ones contain one to four logical operators ("e", "ou")
/// and zero-publication ones none.
pub fn planted_complexity_corpus(n_docs: usize, seed: u64) -> Vec<GrantRecord> {
    let mut rng = rng_from_seed(seed);
    (0..n_docs)
        .map(|i| {
            let productive = i % 2 == 0;
            let n_sentences = rng.gen_range(2..=6);
            let mut sentences: Vec<Vec<&str>> = (0..n_sentences)
                .map(|_| {
                    let mut s = vec![
                        *DETERMINERS.choose(&mut rng).expect("non-empty"),
                        *NOUNS.choose(&mut rng).expect("non-empty"),
                    ];
                    if rng.gen_bool(0.5) {
                        s.push(*ADJECTIVES.choose(&mut rng).expect("non-empty"));
                    }
                    s.push(*VERBS.choose(&mut rng).expect("non-empty"));
                    s.push(*DETERMINERS.choose(&mut rng).expect("non-empty"));
                    s.push(*NOUNS.choose(&mut rng).expect("non-empty"));
                    for _ in 0..rng.gen_range(0..=2) {
                        s.push(*PREPOSITIONS.choose(&mut rng).expect("non-empty"));
                        s.push(*NOUNS.choose(&mut rng).expect("non-empty"));
                    }
                    s
                })
                .collect();
            if productive {
                for _ in 0..rng.gen_range(1..=4) {
                    let s = rng.gen_range(0..sentences.len());
                    let at = rng.gen_range(2..=sentences[s].len());
                    sentences[s].insert(at, *OPERATORS.choose(&mut rng).expect("non-empty"));
                    sentences[s].insert(at + 1, *NOUNS.choose(&mut rng).expect("non-empty"));
                }
            }
            let text: Vec<String> = sentences.iter().map(|s| capitalize(&s.join(" ")) + ".").collect();
            record(i, &text.join(" "), u32::from(productive) * rng.gen_range(1..=5))
        })
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sentences<R: Rng>(words: &[&str], rng: &mut R) -> String {
    let mut out = Vec::new();
    let mut rest = words;
    while !rest.is_empty() {
        let n = rng.gen_range(6..=12).min(rest.len());
        out.push(capitalize(&rest[..n].join(" ")) + ".");
        rest = &rest[n..];
    }
    out.join(" ")
}

fn record(i: usize, abstract_pt: &str, publication_count: u32) -> GrantRecord {
    GrantRecord {
        grant_id: format!("2012/{:05}-{}", i, i % 10),
        title_pt: format!("Projeto sintético {i}"),
        abstract_pt: abstract_pt.to_string(),
        title_en: None,
        abstract_en: None,
        subject: vec!["sintético".to_string()],
        area: [Area::Med, Area::Dent, Area::Vet][i % 3],
        year: 2005 + (i % 10) as i32,
        publication_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{is_valid_grant_id, Label};

    #[test]
    fn generators_are_seeded_and_balanced() {
        let a = planted_topic_corpus(20, 1);
        assert_eq!(a, planted_topic_corpus(20, 1));
        assert_ne!(a, planted_topic_corpus(20, 2));
        assert_eq!(a.iter().filter(|r| r.label() == Label::Productive).count(), 10);
        assert!(a.iter().all(|r| is_valid_grant_id(&r.grant_id)));
        let s = shuffled_labels(&a, 3);
        assert_eq!(s.iter().filter(|r| r.label() == Label::Productive).count(), 10);
    }

    #[test]
    fn operators_only_in_productive_records() {
        for r in planted_complexity_corpus(30, 4) {
            let has_op = r.abstract_pt.split([' ', '.']).any(|w| OPERATORS.contains(&w));
            assert_eq!(has_op, r.label() == Label::Productive, "{}", r.abstract_pt);
        }
    }
}
