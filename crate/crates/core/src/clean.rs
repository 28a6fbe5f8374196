//! Verse text normalization.
//!
//! [`clean_verse`] applies, in order: NFC normalization, removal of verse
//! numbering (`1.1`, `2-47`, `१-१`, `3||4` and standalone leading/trailing
//! digit groups such as `॥१॥`), line breaks to spaces, removal of symbols
//! outside the kept set, whitespace collapse and trimming. The steps are
//! repeated until the text stops changing, so the result is a fixpoint.
//! Devanagari text is kept as-is apart from normalization and numbering.

use alloc::string::String;
use alloc::vec::Vec;

use unicode_normalization::UnicodeNormalization;

const MAX_PASSES: usize = 16;

/// Separators allowed between the two digit groups of a verse number.
const SEPARATORS: [&str; 6] = [".", "-", "\u{2013}", "||", "\u{964}\u{964}", "\u{965}"];

/// Danda and pipe marks that enclose a verse number, e.g. `॥१-१॥`.
const ENCLOSING_MARKS: [char; 3] = ['|', '\u{964}', '\u{965}'];

/// Characters that may decorate a standalone digit group: `(12)`, `॥१२॥`, `47.`
const GROUP_DECORATION: [char; 11] = [
    '|', '\u{964}', '\u{965}', '.', '(', ')', '[', ']', ':', '-', '\u{2013}',
];

const KEPT_PUNCTUATION: [char; 18] = [
    '\'', '\u{2018}', '\u{2019}', '-', '\u{2010}', '\u{2013}', '\u{2014}', '.', ',', ';', ':', '!',
    '?', '(', ')', '"', '\u{201C}', '\u{201D}',
];

pub fn clean_verse(raw: &str) -> String {
    let mut current = clean_pass(raw);
    for _ in 0..MAX_PASSES {
        let next = clean_pass(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn clean_pass(input: &str) -> String {
    let chars: Vec<char> = input.nfc().collect();
    let chars = strip_numbering(&chars);
    let chars: Vec<char> = chars
        .into_iter()
        .map(|c| if is_line_break(c) { ' ' } else { c })
        .collect();
    let chars = filter_symbols(&chars);
    collapse_whitespace(&chars)
}

fn is_line_break(c: char) -> bool {
    matches!(
        c,
        '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}'
    )
}

fn is_indic(c: char) -> bool {
    matches!(c, '\u{900}'..='\u{97F}' | '\u{A8E0}'..='\u{A8FF}' | '\u{1CD0}'..='\u{1CFF}')
}

fn is_combining(c: char) -> bool {
    matches!(c, '\u{300}'..='\u{36F}')
}

fn is_digit(c: char) -> bool {
    c.is_numeric()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining(c) || (is_indic(c) && !ENCLOSING_MARKS.contains(&c))
}

fn is_inline_space(c: char) -> bool {
    c.is_whitespace() && !is_line_break(c)
}

fn digit_run_end(chars: &[char], start: usize) -> usize {
    let mut end = start;
    while end < chars.len() && is_digit(chars[end]) {
        end += 1;
    }
    end
}

fn separator_at(chars: &[char], at: usize) -> Option<usize> {
    SEPARATORS.iter().find_map(|sep| {
        let len = sep.chars().count();
        let matches =
            at + len <= chars.len() && sep.chars().zip(&chars[at..]).all(|(a, &b)| a == b);
        matches.then_some(len)
    })
}

/// Extends a numbering span over enclosing danda/pipe marks and the spaces
/// between them and the number.
fn absorb_marks(chars: &[char], start: usize, end: usize) -> (usize, usize) {
    let mut left = start;
    while left > 0 && is_inline_space(chars[left - 1]) {
        left -= 1;
    }
    let marks_end = left;
    while left > 0 && ENCLOSING_MARKS.contains(&chars[left - 1]) {
        left -= 1;
    }
    let new_start = if left < marks_end { left } else { start };

    let mut right = end;
    while right < chars.len() && is_inline_space(chars[right]) {
        right += 1;
    }
    let marks_start = right;
    while right < chars.len() && ENCLOSING_MARKS.contains(&chars[right]) {
        right += 1;
    }
    let new_end = if right > marks_start { right } else { end };
    (new_start, new_end)
}

fn strip_numbering(chars: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let at_boundary = i == 0 || !is_word_char(chars[i - 1]);
        if at_boundary && is_digit(chars[i]) {
            let first_end = digit_run_end(chars, i);
            if let Some(sep_len) = separator_at(chars, first_end) {
                let second = first_end + sep_len;
                let second_end = digit_run_end(chars, second);
                let closes = second_end == chars.len() || !is_word_char(chars[second_end]);
                if second_end > second && closes {
                    let (start, end) = absorb_marks(chars, i, second_end);
                    // marks to the left were already copied
                    out.truncate(out.len() - (i - start));
                    out.push(' ');
                    i = end;
                    continue;
                }
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    strip_edge_groups(&out)
}

fn is_digit_group(token: &[char]) -> bool {
    token.iter().any(|&c| is_digit(c))
        && token
            .iter()
            .all(|&c| is_digit(c) || GROUP_DECORATION.contains(&c))
}

fn strip_edge_groups(chars: &[char]) -> Vec<char> {
    let mut start = 0;
    let mut end = chars.len();
    loop {
        while start < end && chars[start].is_whitespace() {
            start += 1;
        }
        let mut token_end = start;
        while token_end < end && !chars[token_end].is_whitespace() {
            token_end += 1;
        }
        if token_end > start && is_digit_group(&chars[start..token_end]) {
            start = token_end;
        } else {
            break;
        }
    }
    loop {
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        let mut token_start = end;
        while token_start > start && !chars[token_start - 1].is_whitespace() {
            token_start -= 1;
        }
        if token_start < end && is_digit_group(&chars[token_start..end]) {
            end = token_start;
        } else {
            break;
        }
    }
    chars[start..end].to_vec()
}

fn keep_char(c: char, token_has_letter: bool) -> bool {
    if c.is_whitespace() || is_indic(c) || c.is_alphabetic() || is_combining(c) {
        return true;
    }
    if is_digit(c) {
        return token_has_letter;
    }
    KEPT_PUNCTUATION.contains(&c)
}

fn filter_symbols(chars: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            out.push(chars[i]);
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let token = &chars[start..i];
        let has_letter = token.iter().any(|c| c.is_alphabetic());
        out.extend(token.iter().copied().filter(|&c| keep_char(c, has_letter)));
    }
    out
}

fn collapse_whitespace(chars: &[char]) -> String {
    let mut out = String::with_capacity(chars.len());
    for &c in chars {
        if c.is_whitespace() {
            if !out.is_empty() && !out.ends_with(' ') {
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbering_and_line_break() {
        assert_eq!(
            clean_verse("Dhritarashtra said:\nO Sanjaya, 1.1"),
            "Dhritarashtra said: O Sanjaya,"
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(clean_verse(""), "");
        assert_eq!(clean_verse(" \n\t "), "");
    }

    #[test]
    fn separators() {
        assert_eq!(clean_verse("a 2-47 b"), "a b");
        assert_eq!(clean_verse("a 2\u{2013}47 b"), "a b");
        assert_eq!(clean_verse("a 2||47 b"), "a b");
        assert_eq!(clean_verse("a 2\u{964}\u{964}47 b"), "a b");
    }

    #[test]
    fn numbering_inside_words_is_kept() {
        assert_eq!(clean_verse("v1.1 is a label"), "v1.1 is a label");
    }

    #[test]
    fn danda_enclosed_number() {
        assert_eq!(
            clean_verse("\u{938}\u{91E}\u{94D}\u{91C}\u{92F} \u{965}\u{967}-\u{967}\u{965}"),
            "\u{938}\u{91E}\u{94D}\u{91C}\u{92F}"
        );
    }

    #[test]
    fn edge_digit_groups() {
        assert_eq!(
            clean_verse("12 Better is knowledge (12)"),
            "Better is knowledge"
        );
        assert_eq!(clean_verse("47. Then 3 men"), "Then men");
    }

    #[test]
    fn digits_inside_words_survive() {
        assert_eq!(clean_verse("the 3rd day"), "the 3rd day");
    }

    #[test]
    fn symbols_removed() {
        assert_eq!(
            clean_verse("*Arjuna* said # to @Krishna"),
            "Arjuna said to Krishna"
        );
    }

    #[test]
    fn punctuation_kept() {
        let s = "\u{201C}Sat\u{201D} means Reality \u{2014} O Arjuna; it\u{2019}s good-will!";
        assert_eq!(clean_verse(s), s);
    }

    #[test]
    fn nfc_applied() {
        assert_eq!(clean_verse("a\u{301}tman"), "\u{E1}tman");
    }

    #[test]
    fn idempotent_after_symbol_removal() {
        let once = clean_verse("x 1#.2 y");
        assert_eq!(once, "x . y");
        assert_eq!(clean_verse(&once), once);
    }
}
