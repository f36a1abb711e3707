use super::{LexiconSet, Tag, TaggedToken, Token, TokenKind};

/// Assigns one tag per token.
///
/// Lexicon hits win, then suffix rules, then the noun default for content
/// words. Punctuation and number tokens get their own tags.
pub fn tag_pos(tokens: &[Token], lexicons: &LexiconSet) -> Vec<TaggedToken> {
    tokens
        .iter()
        .map(|token| {
            let tag = match token.kind {
                TokenKind::Punctuation => Tag::Punctuation,
                TokenKind::Number => Tag::Number,
                TokenKind::Word => lexicons
                    .pos_lexicon
                    .get(&token.normalized)
                    .copied()
                    .or_else(|| lexicons.suffix_tag(&token.normalized))
                    .unwrap_or(Tag::Noun),
            };
            let is_function_word = token.kind == TokenKind::Word
                && (tag.is_closed_class() || lexicons.function_words.contains(&token.normalized));
            TaggedToken {
                token: token.clone(),
                tag,
                is_function_word,
                is_named_entity: false,
            }
        })
        .collect()
}
