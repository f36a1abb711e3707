/// Abbreviations (lowercase, without the final period) that never end a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "dr", "dra", "drs", "sr", "sra", "srs", "prof", "profa", "et al", "e.g", "i.e", "fig",
    "figs", "vs", "cf", "approx", "aprox", "ca", "mr", "mrs", "ms", "st", "p.ex",
];

const TERMINALS: [char; 4] = ['.', '!', '?', '…'];
const CLOSERS: [char; 6] = ['"', '\'', ')', ']', '»', '”'];

/// Splits text at terminal punctuation followed by whitespace or end of text.
///
/// A period does not split when the word before it is a listed abbreviation.
/// Returned sentences are trimmed and never empty.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !TERMINALS.contains(&c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && (TERMINALS.contains(&chars[j].1) || CLOSERS.contains(&chars[j].1)) {
            j += 1;
        }
        let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
        let end_byte = if j == chars.len() { text.len() } else { chars[j].0 };
        let more_terminals = chars[i + 1..j].iter().any(|(_, c)| TERMINALS.contains(c));
        let abbreviation =
            c == '.' && !more_terminals && ends_with_abbreviation(&text[start..chars[i].0]);
        if at_boundary && !abbreviation {
            push_trimmed(&mut sentences, &text[start..end_byte]);
            start = end_byte;
        }
        i = j;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

fn ends_with_abbreviation(before_period: &str) -> bool {
    let lower = before_period.to_lowercase();
    ABBREVIATIONS.iter().any(|abbr| {
        lower.ends_with(abbr) && {
            let prefix = &lower[..lower.len() - abbr.len()];
            prefix.is_empty() || prefix.ends_with(|c: char| c.is_whitespace() || c == '(')
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn two_periods() {
        assert_eq!(split_sentences("A b. C d."), ["A b.", "C d."]);
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(
            split_sentences("O Dr. Silva estuda. Fim."),
            ["O Dr. Silva estuda.", "Fim."]
        );
        assert_eq!(
            split_sentences("Silva et al. mostraram isso. Outros, e.g. Souza, não."),
            ["Silva et al. mostraram isso.", "Outros, e.g. Souza, não."]
        );
    }

    #[test]
    fn abbreviation_must_be_a_whole_word() {
        // "adr." is not "dr."
        assert_eq!(split_sentences("Foi no adr. Depois."), ["Foi no adr.", "Depois."]);
    }

    #[test]
    fn decimals_and_closers() {
        assert_eq!(
            split_sentences("Dose de 3.5 mg (aprox.). Ele disse \"sim!\" Então foi"),
            ["Dose de 3.5 mg (aprox.).", "Ele disse \"sim!\"", "Então foi"]
        );
        assert_eq!(split_sentences("Sério?! Sim..."), ["Sério?!", "Sim..."]);
    }
}
