//! Sentence splitting, tokenization, part-of-speech tagging and named-entity
//! marking for Portuguese and English abstracts.
//!
//! Tagging is rule based: closed-class lexicons first, then suffix rules, then
//! a noun default. Output is deterministic for a given input and lexicon set.

mod entities;
mod lexicon;
mod sentences;
mod tagger;
mod tokenize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub use entities::{detect_named_entities, entity_spans};
pub use lexicon::{LexiconSet, SuffixRule};
pub use sentences::{split_sentences, ABBREVIATIONS};
pub use tagger::tag_pos;
pub use tokenize::{tokenize, tokenize_sentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Pt,
    En,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Pt => "pt",
            Language::En => "en",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pt" => Ok(Language::Pt),
            "en" => Ok(Language::En),
            other => Err(format!("unknown language `{other}` (expected pt or en)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Punctuation,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub kind: TokenKind,
    pub sentence_index: usize,
    pub position_in_sentence: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Preposition,
    Pronoun,
    Determiner,
    Conjunction,
    Interjection,
    Punctuation,
    Number,
    Other,
}

impl Tag {
    pub fn is_closed_class(self) -> bool {
        matches!(
            self,
            Tag::Preposition | Tag::Pronoun | Tag::Determiner | Tag::Conjunction
        )
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "noun" => Tag::Noun,
            "verb" => Tag::Verb,
            "adjective" | "adj" => Tag::Adjective,
            "adverb" | "adv" => Tag::Adverb,
            "preposition" | "prep" => Tag::Preposition,
            "pronoun" | "pron" => Tag::Pronoun,
            "determiner" | "det" => Tag::Determiner,
            "conjunction" | "conj" => Tag::Conjunction,
            "interjection" | "intj" => Tag::Interjection,
            "punctuation" | "punct" => Tag::Punctuation,
            "number" | "num" => Tag::Number,
            "other" => Tag::Other,
            other => return Err(format!("unknown tag `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: Tag,
    pub is_function_word: bool,
    pub is_named_entity: bool,
}

impl TaggedToken {
    pub fn is_word(&self) -> bool {
        self.token.kind == TokenKind::Word
    }
}

/// A fully processed document: tagged tokens plus sentence and entity counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub tokens: Vec<TaggedToken>,
    pub sentence_count: usize,
    pub entity_spans: usize,
}

impl TaggedDocument {
    pub fn words(&self) -> impl Iterator<Item = &TaggedToken> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    /// Tokens grouped by sentence, in sentence order.
    pub fn sentences(&self) -> Vec<&[TaggedToken]> {
        let mut out = vec![&self.tokens[0..0]; self.sentence_count];
        let mut start = 0;
        while start < self.tokens.len() {
            let s = self.tokens[start].token.sentence_index;
            let end = self.tokens[start..]
                .iter()
                .position(|t| t.token.sentence_index != s)
                .map_or(self.tokens.len(), |p| start + p);
            if s < out.len() {
                out[s] = &self.tokens[start..end];
            }
            start = end;
        }
        out
    }
}

/// NFC-normalizes text; every entry point runs input through this first.
pub fn normalize_text(text: &str) -> String {
    text.nfc().collect()
}

/// Runs the full pipeline: normalize, split, tokenize, tag, mark entities.
pub fn analyze(text: &str, lexicons: &LexiconSet) -> TaggedDocument {
    let text = normalize_text(text);
    let sentences = split_sentences(&text);
    let tokens: Vec<Token> = sentences
        .iter()
        .enumerate()
        .flat_map(|(i, s)| tokenize_sentence(s, i))
        .collect();
    let mut tagged = tag_pos(&tokens, lexicons);
    let entity_spans = detect_named_entities(&mut tagged);
    TaggedDocument {
        tokens: tagged,
        sentence_count: sentences.len(),
        entity_spans,
    }
}
