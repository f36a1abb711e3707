//! Word-frequency and tf-idf vectors over a top-X vocabulary.
//!
//! The tf-idf weight of word `w` in document `d` is
//!
//! ```text
//! (f(w, d) / n_d) * (ln N / ln N_w)
//! ```
//!
//! with `n_d` the number of words in `d`, `N` the corpus size and `N_w` the
//! number of documents containing `w`. The idf factor is a ratio of
//! logarithms, so the logarithm base does not matter. `N_w = 1` would divide
//! by `ln 1 = 0`; that case uses `ln(N_w + 1)` in the denominator. A word
//! present in every document gets idf factor 1 (including `N = 1`).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::GrantRecord;
use crate::error::{Error, Result};
use crate::textproc::{normalize_text, tokenize, Language, TokenKind};

/// Vocabulary size presets for abstract features.
pub const TOP_X_ABSTRACT_SMALL: usize = 1100;
pub const TOP_X_ABSTRACT_LARGE: usize = 7196;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopX {
    /// 1,100 most frequent words.
    Abstract1,
    /// 7,196 most frequent words.
    Abstract2,
    Custom(usize),
}

impl TopX {
    pub fn value(self) -> usize {
        match self {
            TopX::Abstract1 => TOP_X_ABSTRACT_SMALL,
            TopX::Abstract2 => TOP_X_ABSTRACT_LARGE,
            TopX::Custom(n) => n,
        }
    }

    pub fn from_value(n: usize) -> Self {
        match n {
            TOP_X_ABSTRACT_SMALL => TopX::Abstract1,
            TOP_X_ABSTRACT_LARGE => TopX::Abstract2,
            n => TopX::Custom(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSelector {
    Title,
    Subject,
    TitlePlusSubject,
    Abstract,
}

impl fmt::Display for FieldSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldSelector::Title => "title",
            FieldSelector::Subject => "subject",
            FieldSelector::TitlePlusSubject => "title+subject",
            FieldSelector::Abstract => "abstract",
        })
    }
}

impl FromStr for FieldSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "title" => Ok(FieldSelector::Title),
            "subject" => Ok(FieldSelector::Subject),
            "title+subject" | "title_plus_subject" => Ok(FieldSelector::TitlePlusSubject),
            "abstract" => Ok(FieldSelector::Abstract),
            other => Err(format!(
                "unknown field `{other}` (expected title, subject, title+subject or abstract)"
            )),
        }
    }
}

/// Selected text of a record in the given language. Subject keywords are
/// language neutral.
pub fn field_text(
    record: &GrantRecord,
    selector: FieldSelector,
    language: Language,
) -> Result<String> {
    let missing = |field: &str| Error::MissingField {
        grant_id: record.grant_id.clone(),
        field: field.to_string(),
    };
    let title = || match language {
        Language::Pt => Ok(record.title_pt.clone()),
        Language::En => record.title_en.clone().ok_or_else(|| missing("title_en")),
    };
    let subject = || {
        if record.subject.is_empty() {
            Err(missing("subject"))
        } else {
            Ok(record.subject.join(" ; "))
        }
    };
    match selector {
        FieldSelector::Title => title(),
        FieldSelector::Subject => subject(),
        FieldSelector::TitlePlusSubject => Ok(format!("{} ; {}", title()?, subject()?)),
        FieldSelector::Abstract => match language {
            Language::Pt => Ok(record.abstract_pt.clone()),
            Language::En => record.abstract_en.clone().ok_or_else(|| missing("abstract_en")),
        },
    }
}

/// Lowercased word tokens of `text`; numbers and punctuation are dropped.
pub fn word_tokens(text: &str) -> Vec<String> {
    tokenize(&normalize_text(text))
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.normalized)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Word to dense column index, ordered by descending corpus frequency.
    pub entries: BTreeMap<String, usize>,
    pub doc_freq: BTreeMap<String, usize>,
    pub corpus_size: usize,
    pub top_x: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words in column order.
    pub fn words(&self) -> Vec<&str> {
        let mut words = vec![""; self.entries.len()];
        for (w, &i) in &self.entries {
            words[i] = w.as_str();
        }
        words
    }

    /// Writes `#corpus_size=N<TAB>top_x=X`, a column header, then one
    /// `word<TAB>index<TAB>doc_freq` line per word in index order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#corpus_size={}\ttop_x={}", self.corpus_size, self.top_x)?;
        writeln!(out, "word\tindex\tdoc_freq")?;
        for (i, w) in self.words().into_iter().enumerate() {
            writeln!(out, "{w}\t{i}\t{}", self.doc_freq[w])?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::MalformedRow {
            row: line,
            field: "vocabulary".to_string(),
            reason: reason.to_string(),
        };
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|e| Error::io("<vocabulary>", e))?,
            None => return Err(bad(1, "missing header line")),
        };
        let mut corpus_size = None;
        let mut top_x = None;
        for part in header.trim_start_matches('#').split('\t') {
            match part.split_once('=') {
                Some(("corpus_size", v)) => corpus_size = v.trim().parse().ok(),
                Some(("top_x", v)) => top_x = v.trim().parse().ok(),
                _ => {}
            }
        }
        let (Some(corpus_size), Some(top_x)) = (corpus_size, top_x) else {
            return Err(bad(1, "header must carry corpus_size and top_x"));
        };
        let mut entries = BTreeMap::new();
        let mut doc_freq = BTreeMap::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io("<vocabulary>", e))?;
            if i == 1 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(i + 1, "expected word, index, doc_freq"));
            }
            let index: usize = cols[1].parse().map_err(|_| bad(i + 1, "bad index"))?;
            let df: usize = cols[2].parse().map_err(|_| bad(i + 1, "bad doc_freq"))?;
            entries.insert(cols[0].to_string(), index);
            doc_freq.insert(cols[0].to_string(), df);
        }
        Ok(Vocabulary {
            entries,
            doc_freq,
            corpus_size,
            top_x,
        })
    }
}

/// Keeps the `top_x` most frequent words over tokenized documents.
///
/// Frequency is total occurrences across the corpus; ties at the cutoff go to
/// the lexicographically smaller word.
pub fn fit_vocabulary_tokens(docs: &[Vec<String>], top_x: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if top_x == 0 {
        return Err(Error::InvalidParameter("top_x must be at least 1".into()));
    }
    let mut total: HashMap<&str, usize> = HashMap::new();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = Vec::with_capacity(doc.len());
        for w in doc {
            *total.entry(w.as_str()).or_default() += 1;
            seen.push(w.as_str());
        }
        seen.sort_unstable();
        seen.dedup();
        for w in seen {
            *df.entry(w).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = total.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(top_x);

    let entries = ranked
        .iter()
        .enumerate()
        .map(|(i, (w, _))| (w.to_string(), i))
        .collect();
    let doc_freq = ranked.iter().map(|(w, _)| (w.to_string(), df[w])).collect();
    Ok(Vocabulary {
        entries,
        doc_freq,
        corpus_size: docs.len(),
        top_x,
    })
}

pub fn fit_vocabulary(
    corpus: &[GrantRecord],
    selector: FieldSelector,
    top_x: usize,
    language: Language,
) -> Result<Vocabulary> {
    let docs = corpus
        .iter()
        .map(|r| field_text(r, selector, language).map(|t| word_tokens(&t)))
        .collect::<Result<Vec<_>>>()?;
    fit_vocabulary_tokens(&docs, top_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfVariant {
    /// `ln N / ln N_w`, with the `N_w = 1` guard.
    #[default]
    LogRatio,
    /// Conventional `ln(N / N_w)`.
    Conventional,
}

pub fn tfidf_weight(f_wd: usize, n_d: usize, n_docs: usize, n_w: usize) -> Result<f64> {
    tfidf_weight_with(f_wd, n_d, n_docs, n_w, IdfVariant::LogRatio)
}

pub fn tfidf_weight_with(
    f_wd: usize,
    n_d: usize,
    n_docs: usize,
    n_w: usize,
    variant: IdfVariant,
) -> Result<f64> {
    if n_w == 0 {
        return Err(Error::InvalidParameter(
            "word unseen at fit time (N_w = 0)".into(),
        ));
    }
    if n_d == 0 || n_docs == 0 || n_w > n_docs {
        return Err(Error::InvalidParameter(format!(
            "need n_d >= 1 and 1 <= N_w <= N (n_d = {n_d}, N = {n_docs}, N_w = {n_w})"
        )));
    }
    if f_wd == 0 {
        return Ok(0.0);
    }
    let tf = f_wd as f64 / n_d as f64;
    let idf = match variant {
        IdfVariant::LogRatio => {
            if n_w == n_docs {
                1.0
            } else {
                let denom_count = if n_w == 1 { n_w + 1 } else { n_w };
                (n_docs as f64).ln() / (denom_count as f64).ln()
            }
        }
        IdfVariant::Conventional => (n_docs as f64 / n_w as f64).ln(),
    };
    Ok(tf * idf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    RawFrequency,
    #[default]
    Tfidf,
}

/// Sparse row: strictly increasing indices with finite weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    pub pairs: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(index, value)` pairs, sorting and dropping zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.retain(|&(_, v)| v != 0.0);
        pairs.sort_by_key(|&(i, _)| i);
        SparseVector { pairs }
    }

    /// Stores every entry of a dense row, zeros included.
    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            pairs: values.iter().copied().enumerate().collect(),
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        self.pairs
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.pairs[pos].1)
    }

    pub fn nnz(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(i, v) in &self.pairs {
            out[i] = v;
        }
        out
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.pairs.len() && b < other.pairs.len() {
            let (ia, va) = self.pairs[a];
            let (ib, vb) = other.pairs[b];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += va * vb;
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.pairs.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn is_well_formed(&self, dim: usize) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0)
            && self.pairs.iter().all(|&(i, v)| i < dim && v.is_finite())
    }
}

/// Vector of one tokenized document; `n_d` counts every word, including
/// out-of-vocabulary ones, which are skipped.
pub fn vectorize_tokens(
    tokens: &[String],
    vocabulary: &Vocabulary,
    mode: WeightingMode,
    idf: IdfVariant,
) -> SparseVector {
    let n_d = tokens.len();
    let mut counts: BTreeMap<usize, (usize, &str)> = BTreeMap::new();
    for w in tokens {
        if let Some((word, &idx)) = vocabulary.entries.get_key_value(w) {
            counts.entry(idx).or_insert((0, word.as_str())).0 += 1;
        }
    }
    let pairs = counts
        .into_iter()
        .map(|(idx, (f, word))| {
            let weight = match mode {
                WeightingMode::RawFrequency => f as f64,
                WeightingMode::Tfidf => tfidf_weight_with(
                    f,
                    n_d,
                    vocabulary.corpus_size,
                    vocabulary.doc_freq[word],
                    idf,
                )
                .expect("fitted vocabulary words have 1 <= N_w <= N"),
            };
            (idx, weight)
        })
        .collect();
    SparseVector { pairs }
}

pub fn vectorize(document: &str, vocabulary: &Vocabulary, mode: WeightingMode) -> SparseVector {
    vectorize_tokens(&word_tokens(document), vocabulary, mode, IdfVariant::LogRatio)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(docs: &[&str]) -> Vec<Vec<String>> {
        docs.iter().map(|d| word_tokens(d)).collect()
    }

    #[test]
    fn top_x_keeps_most_frequent() {
        let v = fit_vocabulary_tokens(&toks(&["a a a b b c"]), 2).unwrap();
        assert_eq!(v.words(), ["a", "b"]);
        assert_eq!(v.corpus_size, 1);
    }

    #[test]
    fn presets() {
        assert_eq!(TopX::Abstract1.value(), 1100);
        assert_eq!(TopX::Abstract2.value(), 7196);
        assert_eq!(TopX::from_value(7196), TopX::Abstract2);
        assert_eq!(TopX::from_value(50), TopX::Custom(50));
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = fit_vocabulary_tokens(&toks(&["zeta alfa beta beta"]), 2).unwrap();
        assert_eq!(v.words(), ["beta", "alfa"]);
    }

    #[test]
    fn doc_freq_counts_documents() {
        let v = fit_vocabulary_tokens(&toks(&["a a b", "a c", "c"]), 10).unwrap();
        assert_eq!(v.doc_freq["a"], 2);
        assert_eq!(v.doc_freq["b"], 1);
        assert_eq!(v.doc_freq["c"], 2);
        assert!(v.doc_freq.values().all(|&d| d >= 1 && d <= v.corpus_size));
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_vocabulary_tokens(&[], 5), Err(Error::EmptyCorpus)));
        assert!(fit_vocabulary_tokens(&toks(&["a"]), 0).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(tfidf_weight(0, 10, 100, 9).unwrap(), 0.0);
        assert_eq!(tfidf_weight(3, 7, 50, 50).unwrap(), 3.0 / 7.0);
        // (2/10) * (log 100 / log 10) = 0.2 * 2 = 0.4, whatever the log base.
        let w = tfidf_weight(2, 10, 100, 10).unwrap();
        assert!((w - 0.4).abs() < 1e-15, "{w}");
        assert!(tfidf_weight(1, 1, 10, 0).is_err());
        assert!(tfidf_weight(1, 0, 10, 2).is_err());
        assert!(tfidf_weight(1, 1, 10, 11).is_err());
    }

    #[test]
    fn singleton_guard() {
        let w = tfidf_weight(1, 4, 100, 1).unwrap();
        assert!((w - 0.25 * 100f64.ln() / 2f64.ln()).abs() < 1e-15);
        assert!(w.is_finite());
        assert_eq!(tfidf_weight(2, 4, 1, 1).unwrap(), 0.5);
    }

    #[test]
    fn conventional_variant() {
        let w = tfidf_weight_with(2, 10, 100, 10, IdfVariant::Conventional).unwrap();
        assert!((w - 0.2 * 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn vectorize_examples() {
        let v = fit_vocabulary_tokens(&toks(&["gato cão gato", "gato rato"]), 10).unwrap();
        assert!(vectorize("peixe lobo", &v, WeightingMode::Tfidf).is_empty());

        let raw = vectorize("gato gato gato rato peixe", &v, WeightingMode::RawFrequency);
        assert_eq!(raw.get(v.entries["gato"]), 3.0);
        assert_eq!(raw.get(v.entries["rato"]), 1.0);
        assert_eq!(raw.nnz(), 2);
    }

    #[test]
    fn vectorize_matches_hand_evaluation() {
        // Docs: d0 = "gato cão gato", d1 = "gato rato". N = 2.
        // N_gato = 2, N_cão = 1 (guard: ln 2 / ln 2 = 1), N_rato = 1.
        let docs = toks(&["gato cão gato", "gato rato"]);
        let v = fit_vocabulary_tokens(&docs, 10).unwrap();
        let d0 = vectorize_tokens(&docs[0], &v, WeightingMode::Tfidf, IdfVariant::LogRatio);
        assert_eq!(d0.get(v.entries["gato"]), 2.0 / 3.0);
        assert_eq!(d0.get(v.entries["cão"]), 1.0 / 3.0);
        let d1 = vectorize_tokens(&docs[1], &v, WeightingMode::Tfidf, IdfVariant::LogRatio);
        assert_eq!(d1.get(v.entries["gato"]), 0.5);
        assert_eq!(d1.get(v.entries["rato"]), 0.5);
        assert!(d0.is_well_formed(v.len()) && d1.is_well_formed(v.len()));
    }

    #[test]
    fn n_d_counts_out_of_vocabulary_words() {
        let v = fit_vocabulary_tokens(&toks(&["gato", "gato"]), 1).unwrap();
        let x = vectorize("gato peixe peixe peixe", &v, WeightingMode::Tfidf);
        assert_eq!(x.get(0), 0.25);
    }

    #[test]
    fn tsv_round_trip() {
        let v = fit_vocabulary_tokens(&toks(&["a a b", "b c", "c d"]), 3).unwrap();
        let mut buf = Vec::new();
        v.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#corpus_size=3\ttop_x=3\nword\tindex\tdoc_freq\n"));
        assert_eq!(Vocabulary::read_tsv(buf.as_slice()).unwrap(), v);
    }

    #[test]
    fn field_selection() {
        let r = GrantRecord {
            grant_id: "2001/00001-1".into(),
            title_pt: "Título".into(),
            abstract_pt: "Resumo.".into(),
            title_en: None,
            abstract_en: Some("Abstract.".into()),
            subject: vec!["cárie".into(), "flúor".into()],
            area: crate::corpus::Area::Dent,
            year: 2001,
            publication_count: 0,
        };
        assert_eq!(
            word_tokens(&field_text(&r, FieldSelector::TitlePlusSubject, Language::Pt).unwrap()),
            ["título", "cárie", "flúor"]
        );
        assert_eq!(field_text(&r, FieldSelector::Abstract, Language::En).unwrap(), "Abstract.");
        assert!(matches!(
            field_text(&r, FieldSelector::Title, Language::En),
            Err(Error::MissingField { .. })
        ));
    }

    #[test]
    fn sparse_ops() {
        let a = SparseVector::from_pairs(vec![(3, 1.0), (0, 2.0), (5, 0.0)]);
        assert_eq!(a.pairs, [(0, 2.0), (3, 1.0)]);
        let b = SparseVector::from_dense(&[1.0, 0.0, 0.0, 4.0]);
        assert_eq!(a.dot(&b), 6.0);
        assert_eq!(b.to_dense(4), [1.0, 0.0, 0.0, 4.0]);
        assert_eq!(a.get(1), 0.0);
    }
}
