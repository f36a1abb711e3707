use super::{TaggedToken, TokenKind};

fn is_acronym(surface: &str) -> bool {
    let letters: Vec<char> = surface.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

fn is_capitalized(surface: &str) -> bool {
    surface.chars().next().is_some_and(char::is_uppercase)
}

/// Marks named entities in place and returns the number of entity spans.
///
/// A word is marked when it is an all-caps acronym of two or more letters, or
/// when it is capitalized and not the first word of its sentence. Adjacent
/// marked tokens in the same sentence form one span.
pub fn detect_named_entities(tagged: &mut [TaggedToken]) -> usize {
    let mut current_sentence = None;
    let mut seen_word = false;
    for t in tagged.iter_mut() {
        if current_sentence != Some(t.token.sentence_index) {
            current_sentence = Some(t.token.sentence_index);
            seen_word = false;
        }
        t.is_named_entity = false;
        if t.token.kind != TokenKind::Word {
            continue;
        }
        let sentence_initial = !seen_word;
        seen_word = true;
        t.is_named_entity =
            is_acronym(&t.token.surface) || (!sentence_initial && is_capitalized(&t.token.surface));
    }
    entity_spans(tagged)
}

/// Counts maximal runs of adjacent marked tokens within a sentence.
pub fn entity_spans(tagged: &[TaggedToken]) -> usize {
    let mut spans = 0;
    let mut prev: Option<&TaggedToken> = None;
    for t in tagged {
        if t.is_named_entity {
            let continues = prev.is_some_and(|p| {
                p.is_named_entity && p.token.sentence_index == t.token.sentence_index
            });
            if !continues {
                spans += 1;
            }
        }
        prev = Some(t);
    }
    spans
}
