use alloc::string::String;

use super::Source;

fn is_url(token: &str) -> bool {
    let Some(pos) = token.find("://") else {
        return false;
    };
    let scheme = &token.as_bytes()[..pos];
    match scheme.split_first() {
        Some((first, rest)) => {
            first.is_ascii_alphabetic()
                && rest
                    .iter()
                    .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'+' | b'-' | b'.'))
        }
        None => false,
    }
}

fn is_mention(token: &str) -> bool {
    token.len() > 1 && token.starts_with('@')
}

/// Removes URLs (tokens starting with `scheme://`) and, for tweets,
/// `@mentions`; tweet hashtags keep their body (`#rust` becomes `rust`).
/// Whitespace runs collapse to single spaces and the ends are trimmed.
/// Idempotent.
pub fn clean_text(text: &str, source: Source) -> String {
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        let token = match source {
            Source::Twitter => {
                let body = token.trim_start_matches('#');
                if body.is_empty() || is_mention(body) {
                    continue;
                }
                body
            }
            Source::Web => token,
        };
        if is_url(token) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// CJK Unified Ideographs, Extension A and Compatibility Ideographs.
pub fn is_cjk_ideograph(c: char) -> bool {
    matches!(c, '\u{4e00}'..='\u{9fff}' | '\u{3400}'..='\u{4dbf}' | '\u{f900}'..='\u{faff}')
}

/// Whitespace tokens, except that every CJK ideograph counts as its own
/// word: a token contributes `max(1, ideographs in it)`.
pub fn count_words(text: &str) -> u64 {
    text.split_whitespace()
        .map(|tok| tok.chars().filter(|&c| is_cjk_ideograph(c)).count().max(1) as u64)
        .sum()
}
