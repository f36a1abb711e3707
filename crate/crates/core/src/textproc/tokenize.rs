use super::{split_sentences, Token, TokenKind};

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '’' | '‐')
}

/// Tokenizes one sentence; tokens carry `sentence_index`.
///
/// Alphabetic runs are words, with hyphens and apostrophes kept inside when
/// both neighbours are letters. Digit runs (with inner `.` or `,` between
/// digits) are numbers. Every other non-space character is its own
/// punctuation token.
pub fn tokenize_sentence(sentence: &str, sentence_index: usize) -> Vec<Token> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_alphabetic() {
            i += 1;
            while i < chars.len() {
                if chars[i].is_alphabetic() {
                    i += 1;
                } else if is_joiner(chars[i])
                    && i + 1 < chars.len()
                    && chars[i + 1].is_alphabetic()
                {
                    i += 2;
                } else {
                    break;
                }
            }
            TokenKind::Word
        } else if c.is_ascii_digit() {
            i += 1;
            while i < chars.len() {
                if chars[i].is_ascii_digit() {
                    i += 1;
                } else if matches!(chars[i], '.' | ',')
                    && i + 1 < chars.len()
                    && chars[i + 1].is_ascii_digit()
                {
                    i += 2;
                } else {
                    break;
                }
            }
            TokenKind::Number
        } else {
            i += 1;
            TokenKind::Punctuation
        };
        let surface: String = chars[start..i].iter().collect();
        let normalized = surface.to_lowercase();
        tokens.push(Token {
            surface,
            normalized,
            kind,
            sentence_index,
            position_in_sentence: tokens.len(),
        });
    }
    tokens
}

/// Splits `text` into sentences and tokenizes each of them.
pub fn tokenize(text: &str) -> Vec<Token> {
    split_sentences(text)
        .iter()
        .enumerate()
        .flat_map(|(i, s)| tokenize_sentence(s, i))
        .collect()
}
