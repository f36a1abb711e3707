use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use super::{Language, Tag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub tag: Tag,
}

/// Closed-class word lists, POS lexicon, suffix rules and concreteness norms
/// for one language. Keys are lowercase.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconSet {
    pub language: Language,
    pub function_words: BTreeSet<String>,
    pub prepositions: BTreeSet<String>,
    pub logical_operators: BTreeSet<String>,
    pub pos_lexicon: BTreeMap<String, Tag>,
    /// Sorted longest suffix first.
    pub noun_suffixes: Vec<SuffixRule>,
    /// Scores on the 100 (abstract) to 700 (concrete) scale.
    pub concreteness: BTreeMap<String, f64>,
}

/// Suffix rules only apply when this many characters remain before the suffix.
pub const MIN_STEM_CHARS: usize = 3;

const FILE_POS: &str = "pos.tsv";
const FILE_SUFFIXES: &str = "suffixes.tsv";
const FILE_LOGICAL: &str = "logical_operators.txt";
const FILE_CONCRETENESS: &str = "concreteness.tsv";
const FILE_FUNCTION_WORDS: &str = "function_words.txt";

struct Bundled {
    pos: &'static str,
    suffixes: &'static str,
    logical: &'static str,
    concreteness: &'static str,
}

fn bundled(language: Language) -> Bundled {
    match language {
        Language::Pt => Bundled {
            pos: include_str!("../../data/lexicons/pt/pos.tsv"),
            suffixes: include_str!("../../data/lexicons/pt/suffixes.tsv"),
            logical: include_str!("../../data/lexicons/pt/logical_operators.txt"),
            concreteness: include_str!("../../data/lexicons/pt/concreteness.tsv"),
        },
        Language::En => Bundled {
            pos: include_str!("../../data/lexicons/en/pos.tsv"),
            suffixes: include_str!("../../data/lexicons/en/suffixes.tsv"),
            logical: include_str!("../../data/lexicons/en/logical_operators.txt"),
            concreteness: include_str!("../../data/lexicons/en/concreteness.tsv"),
        },
    }
}

fn entries<'a>(text: &'a str) -> impl Iterator<Item = (usize, &'a str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn two_columns<'a>(source: &str, line: usize, l: &'a str) -> Result<(&'a str, &'a str)> {
    l.split_once('\t')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| Error::Lexicon {
            path: source.to_string(),
            line,
            reason: "expected two tab-separated columns".to_string(),
        })
}

impl LexiconSet {
    fn empty(language: Language) -> Self {
        LexiconSet {
            language,
            function_words: BTreeSet::new(),
            prepositions: BTreeSet::new(),
            logical_operators: BTreeSet::new(),
            pos_lexicon: BTreeMap::new(),
            noun_suffixes: Vec::new(),
            concreteness: BTreeMap::new(),
        }
    }

    /// Lexicons compiled into the crate.
    pub fn builtin(language: Language) -> Self {
        let b = bundled(language);
        let mut set = Self::empty(language);
        set.merge_pos("<builtin pos>", b.pos)
            .and_then(|_| set.merge_suffixes("<builtin suffixes>", b.suffixes))
            .and_then(|_| set.merge_concreteness("<builtin concreteness>", b.concreteness))
            .expect("bundled lexicons parse");
        set.merge_logical(b.logical);
        set
    }

    /// Starts from the built-in lexicons and overlays whichever of
    /// `pos.tsv`, `suffixes.tsv`, `logical_operators.txt`, `concreteness.tsv`
    /// and `function_words.txt` exist in `dir`.
    ///
    /// A `logical_operators.txt` or `concreteness.tsv` file replaces the
    /// built-in list; POS and suffix entries are merged, file entries winning.
    pub fn from_dir(language: Language, dir: &Path) -> Result<Self> {
        let mut set = Self::builtin(language);
        let read = |name: &str| -> Result<Option<(String, String)>> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(None);
            }
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Ok(Some((path.display().to_string(), text)))
        };
        if let Some((src, text)) = read(FILE_POS)? {
            set.merge_pos(&src, &text)?;
        }
        if let Some((src, text)) = read(FILE_SUFFIXES)? {
            set.merge_suffixes(&src, &text)?;
        }
        if let Some((src, text)) = read(FILE_LOGICAL)? {
            set.logical_operators.clear();
            set.merge_logical(&text);
            if set.logical_operators.is_empty() {
                return Err(Error::Lexicon {
                    path: src,
                    line: 0,
                    reason: "logical operator list is empty".to_string(),
                });
            }
        }
        if let Some((src, text)) = read(FILE_CONCRETENESS)? {
            set.concreteness.clear();
            set.merge_concreteness(&src, &text)?;
        }
        if let Some((_, text)) = read(FILE_FUNCTION_WORDS)? {
            for (_, w) in entries(&text) {
                set.function_words.insert(w.to_lowercase());
            }
        }
        Ok(set)
    }

    fn merge_pos(&mut self, source: &str, text: &str) -> Result<()> {
        for (line, l) in entries(text) {
            let (word, tag) = two_columns(source, line, l)?;
            let tag: Tag = tag.parse().map_err(|reason| Error::Lexicon {
                path: source.to_string(),
                line,
                reason,
            })?;
            let word = word.to_lowercase();
            if let Some(old) = self.pos_lexicon.insert(word.clone(), tag) {
                if old.is_closed_class() && !tag.is_closed_class() {
                    self.function_words.remove(&word);
                }
                if old == Tag::Preposition {
                    self.prepositions.remove(&word);
                }
            }
            if tag.is_closed_class() {
                self.function_words.insert(word.clone());
            }
            if tag == Tag::Preposition {
                self.prepositions.insert(word);
            }
        }
        Ok(())
    }

    fn merge_suffixes(&mut self, source: &str, text: &str) -> Result<()> {
        for (line, l) in entries(text) {
            let (suffix, tag) = two_columns(source, line, l)?;
            let tag: Tag = tag.parse().map_err(|reason| Error::Lexicon {
                path: source.to_string(),
                line,
                reason,
            })?;
            let suffix = suffix.to_lowercase();
            self.noun_suffixes.retain(|r| r.suffix != suffix);
            self.noun_suffixes.push(SuffixRule { suffix, tag });
        }
        self.noun_suffixes.sort_by(|a, b| {
            b.suffix
                .chars()
                .count()
                .cmp(&a.suffix.chars().count())
                .then_with(|| a.suffix.cmp(&b.suffix))
        });
        Ok(())
    }

    fn merge_logical(&mut self, text: &str) {
        for (_, w) in entries(text) {
            self.logical_operators.insert(w.to_lowercase());
        }
    }

    fn merge_concreteness(&mut self, source: &str, text: &str) -> Result<()> {
        for (line, l) in entries(text) {
            let (word, score) = two_columns(source, line, l)?;
            let score: f64 = score
                .parse()
                .ok()
                .filter(|s| (100.0..=700.0).contains(s))
                .ok_or_else(|| Error::Lexicon {
                    path: source.to_string(),
                    line,
                    reason: format!("score `{score}` is not a number in [100, 700]"),
                })?;
            self.concreteness.insert(word.to_lowercase(), score);
        }
        Ok(())
    }

    /// Suffix-rule tag for an unknown word, if any rule matches.
    pub fn suffix_tag(&self, normalized: &str) -> Option<Tag> {
        let len = normalized.chars().count();
        self.noun_suffixes
            .iter()
            .find(|r| {
                normalized.ends_with(r.suffix.as_str())
                    && len >= r.suffix.chars().count() + MIN_STEM_CHARS
            })
            .map(|r| r.tag)
    }
}
