//! Grant records, productivity labels, balanced resampling and stratified folds.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, Stream};

pub const REQUIRED_COLUMNS: [&str; 6] = [
    "grant_id",
    "title_pt",
    "abstract_pt",
    "area",
    "year",
    "publication_count",
];

/// Thresholds reported by [`productivity_histogram`] (n or more publications).
pub const HISTOGRAM_THRESHOLDS: std::ops::RangeInclusive<u32> = 2..=8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Area {
    Med,
    Dent,
    Vet,
    Other,
}

impl Area {
    pub fn as_str(self) -> &'static str {
        match self {
            Area::Med => "MED",
            Area::Dent => "DENT",
            Area::Vet => "VET",
            Area::Other => "OTHER",
        }
    }
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Area {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MED" => Ok(Area::Med),
            "DENT" => Ok(Area::Dent),
            "VET" => Ok(Area::Vet),
            "OTHER" => Ok(Area::Other),
            other => Err(format!("unknown area `{other}` (expected MED, DENT, VET or OTHER)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    ZeroPublications,
    Productive,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::ZeroPublications, Label::Productive];

    pub fn index(self) -> usize {
        match self {
            Label::ZeroPublications => 0,
            Label::Productive => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::ZeroPublications
        } else {
            Label::Productive
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::ZeroPublications => Label::Productive,
            Label::Productive => Label::ZeroPublications,
        }
    }
}

/// 0 publications is the negative class, anything else is productive.
pub fn derive_label(publication_count: u32) -> Label {
    if publication_count >= 1 {
        Label::Productive
    } else {
        Label::ZeroPublications
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrantRecord {
    pub grant_id: String,
    pub title_pt: String,
    pub abstract_pt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_en: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_en: Option<String>,
    #[serde(default)]
    pub subject: Vec<String>,
    pub area: Area,
    pub year: i32,
    pub publication_count: u32,
}

impl GrantRecord {
    pub fn label(&self) -> Label {
        derive_label(self.publication_count)
    }
}

/// `aaaa/nnnnn-d`: digits, slash, digits, dash, one digit.
pub fn is_valid_grant_id(id: &str) -> bool {
    let Some((year, rest)) = id.split_once('/') else {
        return false;
    };
    let Some((number, check)) = rest.split_once('-') else {
        return false;
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    all_digits(year) && all_digits(number) && check.len() == 1 && all_digits(check)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionKind {
    Malformed,
    EmptyAbstract,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub row: usize,
    pub field: String,
    pub reason: String,
    pub kind: RejectionKind,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: `{}`: {}", self.row, self.field, self.reason)
    }
}

/// Result of a lenient read: accepted records plus every rejected row.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub records: Vec<GrantRecord>,
    pub rejected: Vec<Rejection>,
}

impl IngestReport {
    pub fn empty_abstract_count(&self) -> usize {
        self.rejected
            .iter()
            .filter(|r| r.kind == RejectionKind::EmptyAbstract)
            .count()
    }
}

/// Reads every row, collecting malformed rows instead of failing.
///
/// Fails only on I/O errors, a missing required CSV column, or a duplicate
/// `grant_id` (which rejects the whole file).
pub fn ingest(path: &Path, format: InputFormat) -> Result<IngestReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, format)
}

pub fn ingest_reader<R: Read>(reader: R, format: InputFormat) -> Result<IngestReport> {
    let rows = match format {
        InputFormat::Csv => read_csv_rows(reader)?,
        InputFormat::Jsonl => read_jsonl_rows(reader)?,
    };
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    for (row, raw) in rows {
        match raw.into_record(row) {
            Ok(record) => {
                if !seen.insert(record.grant_id.clone()) {
                    return Err(Error::DuplicateGrantId {
                        grant_id: record.grant_id,
                        row,
                    });
                }
                report.records.push(record);
            }
            Err(rejection) => report.rejected.push(rejection),
        }
    }
    Ok(report)
}

/// Strict load: a malformed row is an error naming the row and field.
///
/// Rows with an empty Portuguese abstract are rejected and counted in a
/// warning rather than failing the load.
pub fn load_corpus(path: &Path, format: InputFormat) -> Result<Vec<GrantRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_corpus_reader(file, format)
}

pub fn load_corpus_reader<R: Read>(reader: R, format: InputFormat) -> Result<Vec<GrantRecord>> {
    let report = ingest_reader(reader, format)?;
    if let Some(bad) = report
        .rejected
        .iter()
        .find(|r| r.kind == RejectionKind::Malformed)
    {
        return Err(Error::MalformedRow {
            row: bad.row,
            field: bad.field.clone(),
            reason: bad.reason.clone(),
        });
    }
    let empty = report.empty_abstract_count();
    if empty > 0 {
        log::warn!("rejected {empty} record(s) with an empty abstract_pt");
    }
    Ok(report.records)
}

/// Writes records as canonical JSONL, one object per line.
pub fn write_jsonl<W: Write>(records: &[GrantRecord], mut out: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io("<jsonl output>", e))?;
    }
    Ok(())
}

/// One input row before validation, with every field still textual.
#[derive(Debug, Default)]
struct RawRow {
    fields: BTreeMap<&'static str, Option<String>>,
    subject: Vec<String>,
}

const ALL_FIELDS: [&str; 9] = [
    "grant_id",
    "title_pt",
    "abstract_pt",
    "title_en",
    "abstract_en",
    "subject",
    "area",
    "year",
    "publication_count",
];

impl RawRow {
    fn into_record(mut self, row: usize) -> std::result::Result<GrantRecord, Rejection> {
        let malformed = |field: &str, reason: String| Rejection {
            row,
            field: field.to_string(),
            reason,
            kind: RejectionKind::Malformed,
        };
        let fields = &mut self.fields;
        let mut take = |field: &'static str| fields.remove(field).flatten();
        let required = |value: Option<String>, field: &str| {
            value.ok_or_else(|| malformed(field, "missing value".to_string()))
        };

        let grant_id = required(take("grant_id"), "grant_id")?.trim().to_string();
        if !is_valid_grant_id(&grant_id) {
            return Err(malformed(
                "grant_id",
                format!("`{grant_id}` does not match aaaa/nnnnn-d"),
            ));
        }
        let title_pt = required(take("title_pt"), "title_pt")?;
        let abstract_pt = required(take("abstract_pt"), "abstract_pt").unwrap_or_default();
        let area = required(take("area"), "area")?
            .parse::<Area>()
            .map_err(|e| malformed("area", e))?;
        let year_raw = required(take("year"), "year")?;
        let year = year_raw
            .trim()
            .parse::<i32>()
            .map_err(|_| malformed("year", format!("`{year_raw}` is not an integer year")))?;
        let count_raw = required(take("publication_count"), "publication_count")?;
        let publication_count = count_raw.trim().parse::<u32>().map_err(|_| {
            malformed(
                "publication_count",
                format!("`{count_raw}` is not a non-negative integer"),
            )
        })?;
        let non_empty = |s: Option<String>| s.filter(|v| !v.trim().is_empty());
        let title_en = non_empty(take("title_en"));
        let abstract_en = non_empty(take("abstract_en"));

        if abstract_pt.trim().is_empty() {
            return Err(Rejection {
                row,
                field: "abstract_pt".to_string(),
                reason: "empty abstract".to_string(),
                kind: RejectionKind::EmptyAbstract,
            });
        }

        Ok(GrantRecord {
            grant_id,
            title_pt,
            abstract_pt,
            title_en,
            abstract_en,
            subject: self.subject,
            area,
            year,
            publication_count,
        })
    }
}

fn split_subject(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .map(str::to_string)
        .collect()
}

fn read_csv_rows<R: Read>(reader: R) -> Result<Vec<(usize, RawRow)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    for name in REQUIRED_COLUMNS {
        if column(name).is_none() {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    let columns: Vec<(&'static str, Option<usize>)> =
        ALL_FIELDS.iter().map(|&f| (f, column(f))).collect();

    let mut rows = Vec::new();
    for result in csv.records() {
        let record = result?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut raw = RawRow::default();
        for &(field, idx) in &columns {
            let value = idx.and_then(|i| record.get(i)).map(str::to_string);
            if field == "subject" {
                raw.subject = value.as_deref().map(split_subject).unwrap_or_default();
            } else {
                raw.fields.insert(field, value);
            }
        }
        rows.push((line, raw));
    }
    Ok(rows)
}

fn read_jsonl_rows<R: Read>(reader: R) -> Result<Vec<(usize, RawRow)>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<jsonl input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                // Unparseable lines become rows whose every field is missing.
                log::debug!("line {line_no}: {e}");
                let mut raw = RawRow::default();
                raw.fields.insert("grant_id", None);
                rows.push((line_no, raw));
                continue;
            }
        };
        let mut raw = RawRow::default();
        for field in ALL_FIELDS {
            let v = value.get(field);
            if field == "subject" {
                raw.subject = match v {
                    Some(serde_json::Value::Array(items)) => items
                        .iter()
                        .filter_map(|x| x.as_str())
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                    Some(serde_json::Value::String(s)) => split_subject(s),
                    _ => Vec::new(),
                };
                continue;
            }
            let text = match v {
                None | Some(serde_json::Value::Null) => None,
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                Some(other) => Some(other.to_string()),
            };
            raw.fields.insert(field, text);
        }
        rows.push((line_no, raw));
    }
    Ok(rows)
}

/// Fraction of grants with at least `threshold` publications, for thresholds 2..=8.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductivityHistogram {
    pub total: usize,
    pub positive_fraction: f64,
    pub rows: Vec<(u32, f64)>,
}

pub fn productivity_histogram(records: &[GrantRecord]) -> Result<ProductivityHistogram> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let total = records.len();
    let at_least = |n: u32| {
        records.iter().filter(|r| r.publication_count >= n).count() as f64 / total as f64
    };
    Ok(ProductivityHistogram {
        total,
        positive_fraction: at_least(1),
        rows: HISTOGRAM_THRESHOLDS.map(|n| (n, at_least(n))).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    /// Position of the record in the source list.
    pub index: usize,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedDataset {
    pub instances: Vec<Instance>,
    pub resample_seed: u64,
    pub source_count_pos: usize,
    pub source_count_neg: usize,
}

impl BalancedDataset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.instances.iter().filter(|i| i.label == label).count()
    }
}

/// Undersamples the majority class down to the minority count.
///
/// Every minority instance is kept; majority instances are drawn without
/// replacement. Instances come back ordered by source index.
pub fn balanced_resample(labels: &[Label], seed: u64) -> Result<BalancedDataset> {
    let positives: Vec<usize> = positions(labels, Label::Productive);
    let negatives: Vec<usize> = positions(labels, Label::ZeroPublications);
    if positives.is_empty() {
        return Err(Error::EmptyClass(Label::Productive));
    }
    if negatives.is_empty() {
        return Err(Error::EmptyClass(Label::ZeroPublications));
    }
    let (minority, mut majority) = if positives.len() <= negatives.len() {
        (positives.clone(), negatives.clone())
    } else {
        (negatives.clone(), positives.clone())
    };
    let mut rng = rng_from_seed(seed);
    let (chosen, _) = majority.partial_shuffle(&mut rng, minority.len());
    let mut selected: Vec<usize> = minority.iter().chain(chosen.iter()).copied().collect();
    selected.sort_unstable();

    Ok(BalancedDataset {
        instances: selected
            .into_iter()
            .map(|index| Instance {
                index,
                label: labels[index],
            })
            .collect(),
        resample_seed: seed,
        source_count_pos: positives.len(),
        source_count_neg: negatives.len(),
    })
}

fn positions(labels: &[Label], label: Label) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == label)
        .map(|(i, _)| i)
        .collect()
}

pub fn resample_seed(base_seed: u64, repeat: usize) -> u64 {
    derive_seed(base_seed, Stream::Resample, repeat as u64)
}

pub fn repeat_resamples(
    labels: &[Label],
    n_repeats: usize,
    base_seed: u64,
) -> Result<Vec<BalancedDataset>> {
    (0..n_repeats)
        .map(|i| balanced_resample(labels, resample_seed(base_seed, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold index for each instance position.
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment over a label sequence.
///
/// Each class is shuffled, the classes are laid end to end, and position `j`
/// goes to fold `j mod k`. Fold sizes then differ by at most one overall and
/// within each class.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::TooFewInstances {
            needed: k,
            got: labels.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut order = Vec::with_capacity(labels.len());
    for label in Label::BOTH {
        let mut members = positions(labels, label);
        members.shuffle(&mut rng);
        order.extend(members);
    }
    let mut assignment = vec![0; labels.len()];
    for (j, idx) in order.into_iter().enumerate() {
        assignment[idx] = j % k;
    }
    Ok(FoldAssignment { k, assignment })
}

impl BalancedDataset {
    pub fn stratified_kfold(&self, k: usize, seed: u64) -> Result<FoldAssignment> {
        stratified_kfold(&self.labels(), k, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "grant_id,title_pt,abstract_pt,title_en,abstract_en,subject,area,year,publication_count\n";

    fn labels(pos: usize, neg: usize) -> Vec<Label> {
        let mut v = vec![Label::Productive; pos];
        v.extend(vec![Label::ZeroPublications; neg]);
        v
    }

    fn record(count: u32) -> GrantRecord {
        GrantRecord {
            grant_id: "2010/12345-6".into(),
            title_pt: "t".into(),
            abstract_pt: "a".into(),
            title_en: None,
            abstract_en: None,
            subject: vec![],
            area: Area::Med,
            year: 2010,
            publication_count: count,
        }
    }

    #[test]
    fn header_only_csv_is_empty() {
        let got = load_corpus_reader(HEADER.as_bytes(), InputFormat::Csv).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn csv_rows_keep_order() {
        let data = format!(
            "{HEADER}\
             2001/00001-1,T1,Abs um.,,,a;b,MED,2001,0\n\
             2002/00002-2,T2,Abs dois.,Title,Abstract,,DENT,2002,3\n\
             2003/00003-3,\"T, 3\",\"Abs \"\"tres\"\".\",,,x,VET,2003,1\n"
        );
        let got = load_corpus_reader(data.as_bytes(), InputFormat::Csv).unwrap();
        let ids: Vec<_> = got.iter().map(|r| r.grant_id.as_str()).collect();
        assert_eq!(ids, ["2001/00001-1", "2002/00002-2", "2003/00003-3"]);
        assert_eq!(got[0].subject, ["a", "b"]);
        assert_eq!(got[1].title_en.as_deref(), Some("Title"));
        assert_eq!(got[2].title_pt, "T, 3");
        assert_eq!(got[2].abstract_pt, "Abs \"tres\".");
        assert_eq!(got[1].publication_count, 3);
    }

    #[test]
    fn negative_count_names_the_field() {
        let data = format!("{HEADER}2001/00001-1,T,A,,,,MED,2001,-1\n");
        let err = load_corpus_reader(data.as_bytes(), InputFormat::Csv).unwrap_err();
        match err {
            Error::MalformedRow { row, field, .. } => {
                assert_eq!(row, 2);
                assert_eq!(field, "publication_count");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_reject_the_file() {
        let data = format!(
            "{HEADER}2001/00001-1,T,A,,,,MED,2001,0\n2001/00001-1,T,B,,,,MED,2001,0\n"
        );
        assert!(matches!(
            ingest_reader(data.as_bytes(), InputFormat::Csv),
            Err(Error::DuplicateGrantId { row: 3, .. })
        ));
    }

    #[test]
    fn missing_column_is_reported() {
        let data = "grant_id,title_pt,area,year,publication_count\n";
        match load_corpus_reader(data.as_bytes(), InputFormat::Csv) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "abstract_pt"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_abstract_is_rejected_not_fatal() {
        let data = format!(
            "{HEADER}2001/00001-1,T,,,,,MED,2001,0\n2001/00002-1,T,Texto.,,,,MED,2001,2\n"
        );
        let report = ingest_reader(data.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.empty_abstract_count(), 1);
        let strict = load_corpus_reader(data.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(strict.len(), 1);
    }

    #[test]
    fn jsonl_subject_array_and_bad_id() {
        let data = r#"{"grant_id":"1999/01234-5","title_pt":"T","abstract_pt":"A.","subject":["x","y"],"area":"vet","year":1999,"publication_count":2}
{"grant_id":"1999-01234/5","title_pt":"T","abstract_pt":"A.","area":"VET","year":1999,"publication_count":0}
"#;
        let report = ingest_reader(data.as_bytes(), InputFormat::Jsonl).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].subject, ["x", "y"]);
        assert_eq!(report.records[0].area, Area::Vet);
        assert_eq!(report.rejected.len(), 1);
        assert_eq!(report.rejected[0].field, "grant_id");
        assert_eq!(report.rejected[0].row, 2);
    }

    #[test]
    fn jsonl_round_trip() {
        let mut r = record(4);
        r.subject = vec!["a".into(), "b c".into()];
        r.abstract_en = Some("Text.".into());
        let mut buf = Vec::new();
        write_jsonl(&[r.clone()], &mut buf).unwrap();
        let back = load_corpus_reader(buf.as_slice(), InputFormat::Jsonl).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn grant_id_pattern() {
        assert!(is_valid_grant_id("2010/12345-6"));
        assert!(!is_valid_grant_id("2010/12345-66"));
        assert!(!is_valid_grant_id("2010/-6"));
        assert!(!is_valid_grant_id("20a0/12345-6"));
        assert!(!is_valid_grant_id("2010-12345/6"));
    }

    #[test]
    fn labels_from_counts() {
        assert_eq!(derive_label(0), Label::ZeroPublications);
        assert_eq!(derive_label(1), Label::Productive);
        assert_eq!(derive_label(7), Label::Productive);
    }

    #[test]
    fn histogram_examples() {
        let recs: Vec<_> = [0, 0, 0, 0, 0, 1, 1, 1, 2, 2].map(record).to_vec();
        let h = productivity_histogram(&recs).unwrap();
        assert_eq!(h.rows[0], (2, 0.2));
        assert!((h.positive_fraction - 0.5).abs() < 1e-15);

        let zeros: Vec<_> = [0, 0, 0].map(record).to_vec();
        let h = productivity_histogram(&zeros).unwrap();
        assert!(h.rows.iter().all(|&(_, f)| f == 0.0));

        let threes: Vec<_> = [3, 3, 3, 3].map(record).to_vec();
        let h = productivity_histogram(&threes).unwrap();
        assert_eq!(h.rows[0].1, 1.0);
        assert_eq!(h.rows[1].1, 1.0);
        assert_eq!(h.rows[2], (4, 0.0));

        assert!(matches!(productivity_histogram(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn resample_examples() {
        let l = labels(5, 20);
        let d = balanced_resample(&l, 42).unwrap();
        assert_eq!(d.len(), 10);
        assert_eq!(d.count(Label::Productive), 5);
        assert_eq!(d.count(Label::ZeroPublications), 5);
        assert_eq!((d.source_count_pos, d.source_count_neg), (5, 20));

        let even = labels(5, 5);
        for seed in [0, 1, 99] {
            assert_eq!(balanced_resample(&even, seed).unwrap().len(), 10);
        }

        let a = balanced_resample(&l, 1).unwrap();
        let b = balanced_resample(&l, 1).unwrap();
        let c = balanced_resample(&l, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.instances, c.instances);
    }

    #[test]
    fn positive_majority_swaps_roles() {
        let l = labels(12, 3);
        let d = balanced_resample(&l, 7).unwrap();
        assert_eq!(d.count(Label::ZeroPublications), 3);
        assert_eq!(d.count(Label::Productive), 3);
    }

    #[test]
    fn resample_needs_both_classes() {
        assert!(matches!(
            balanced_resample(&labels(0, 4), 1),
            Err(Error::EmptyClass(Label::Productive))
        ));
        assert!(matches!(
            balanced_resample(&labels(4, 0), 1),
            Err(Error::EmptyClass(Label::ZeroPublications))
        ));
    }

    #[test]
    fn repeats() {
        let l = labels(5, 30);
        let all = repeat_resamples(&l, 10, 3).unwrap();
        assert_eq!(all.len(), 10);
        assert!(all.iter().all(|d| d.count(Label::Productive) == 5 && d.len() == 10));
        let one = repeat_resamples(&l, 1, 3).unwrap();
        assert_eq!(one[0], balanced_resample(&l, resample_seed(3, 0)).unwrap());
        assert!(repeat_resamples(&l, 0, 3).unwrap().is_empty());
    }

    #[test]
    fn kfold_examples() {
        let l = labels(10, 10);
        let f = stratified_kfold(&l, 10, 5).unwrap();
        for fold in 0..10 {
            let test = f.test_indices(fold);
            assert_eq!(test.len(), 2);
            let pos = test.iter().filter(|&&i| l[i] == Label::Productive).count();
            assert_eq!(pos, 1);
        }

        let loo = stratified_kfold(&l, 20, 5).unwrap();
        assert!(loo.fold_sizes().iter().all(|&s| s == 1));

        let l21 = labels(10, 11);
        let mut sizes = stratified_kfold(&l21, 10, 5).unwrap().fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, [2, 2, 2, 2, 2, 2, 2, 2, 2, 3]);

        assert!(matches!(
            stratified_kfold(&labels(2, 2), 10, 0),
            Err(Error::TooFewInstances { needed: 10, got: 4 })
        ));
    }
}
