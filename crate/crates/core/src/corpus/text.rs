//! Tokenization and sentence segmentation.

use serde::{Deserialize, Serialize};

use super::Sentence;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{00A1}'
                | '\u{00A7}'
                | '\u{00AB}'
                | '\u{00B6}'
                | '\u{00B7}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{3001}'..='\u{3003}'
                | '\u{300C}'..='\u{300F}'
        )
}

/// Lowercases, splits on Unicode whitespace and strips punctuation from
/// both ends of every piece. Internal punctuation ("i'm", "u.s") is kept.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|piece| {
            let lowered = piece.to_lowercase();
            let trimmed = lowered.trim_matches(is_punctuation);
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .enumerate()
        .map(|(position, surface)| Token { surface, position })
        .collect()
}

/// Token surfaces only, the form most callers want.
pub fn token_surfaces(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.surface).collect()
}

/// Lowercased token-joined form used by the string metrics.
pub fn normalized_text(text: &str) -> String {
    token_surfaces(text).join(" ")
}

/// Word count under the tokenizer rule.
pub fn word_count(text: &str) -> usize {
    tokenize(text).len()
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "gen", "col", "lt", "sgt",
    "capt", "rev", "hon", "etc",
];

fn ends_with_abbreviation(segment: &str) -> bool {
    let last = segment
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    let word = last.trim_end_matches('.');
    // single initials ("A.") stay sentence-final
    word.chars().count() > 1 && ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201D}' | '\u{2019}' | '\u{00BB}')
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits text at `.`, `!` or `?` (optionally followed by closing quotes or
/// brackets) when whitespace and then an uppercase letter follow, or the text
/// ends. A short list of titles ("Mr.", "Dr.") never ends a sentence.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if !is_terminator(chars[i].1) {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < chars.len() && (is_terminator(chars[end].1) || is_closer(chars[end].1)) {
            end += 1;
        }
        let byte_end = chars.get(end).map_or(text.len(), |&(b, _)| b);
        let mut next = end;
        while next < chars.len() && chars[next].1.is_whitespace() {
            next += 1;
        }
        let boundary = next == chars.len() || (next > end && chars[next].1.is_uppercase());
        if boundary && !ends_with_abbreviation(&text[start..byte_end]) {
            pieces.push(&text[start..byte_end]);
            start = byte_end;
        }
        i = end;
    }
    if start < text.len() {
        pieces.push(&text[start..]);
    }
    pieces
        .into_iter()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(index, p)| Sentence::new(index, collapse_whitespace(p)))
        .collect()
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
