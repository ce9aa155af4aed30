use alloc::string::String;
use alloc::vec::Vec;

/// Inline elements that do not separate words.
const INLINE: &[&str] = &[
    "a", "abbr", "b", "bdi", "bdo", "cite", "code", "data", "dfn", "em", "font", "i", "kbd",
    "mark", "q", "s", "samp", "small", "span", "strong", "sub", "sup", "time", "u", "var",
];

/// Elements whose content is never text.
const RAW_TEXT: &[&str] = &["script", "style"];

/// Returns the text of every `<p>` element, in document order.
///
/// Nested tags are stripped, the common entities (`&amp; &lt; &gt; &quot;
/// &apos; &nbsp;` and numeric references) are decoded, and whitespace is
/// collapsed. Anything outside a paragraph is discarded.
///
/// Malformed input never fails. A new `<p>` closes any open paragraph and
/// end of input closes the last one. Angle brackets never reach the
/// output: stray or entity-encoded `<` and `>` become spaces.
pub fn extract_paragraphs(html: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut in_p = false;
    let bytes = html.as_bytes();
    let mut i = 0;

    while i < bytes.len() {
        match bytes[i] {
            b'<' => match parse_tag(html, i) {
                Some(tag) => {
                    i = tag.end;
                    if tag.name.eq_ignore_ascii_case("p") {
                        if in_p {
                            flush(&mut current, &mut out);
                        }
                        in_p = !tag.closing;
                    } else if !tag.closing
                        && RAW_TEXT.iter().any(|t| tag.name.eq_ignore_ascii_case(t))
                    {
                        i = skip_raw_text(html, i, tag.name);
                    } else if in_p && !INLINE.iter().any(|t| tag.name.eq_ignore_ascii_case(t)) {
                        current.push(' ');
                    }
                }
                None => {
                    if in_p {
                        current.push(' ');
                    }
                    i += 1;
                }
            },
            b'&' if in_p => {
                let (c, len) = decode_entity(&html[i..]);
                current.push(if c == '<' || c == '>' { ' ' } else { c });
                i += len;
            }
            _ => {
                let c = html[i..].chars().next().unwrap();
                if in_p {
                    current.push(if c == '>' { ' ' } else { c });
                }
                i += c.len_utf8();
            }
        }
    }
    if in_p {
        flush(&mut current, &mut out);
    }
    out
}

fn flush(current: &mut String, out: &mut Vec<String>) {
    let mut text = String::with_capacity(current.len());
    for w in current.split_whitespace() {
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(w);
    }
    if !text.is_empty() {
        out.push(text);
    }
    current.clear();
}

struct Tag<'a> {
    name: &'a str,
    closing: bool,
    /// Byte offset just past the tag.
    end: usize,
}

/// Parses the markup starting at `start` (which holds `<`). Comments,
/// doctypes and processing instructions come back with an empty name.
/// Returns `None` if this `<` does not open a tag.
fn parse_tag(html: &str, start: usize) -> Option<Tag<'_>> {
    let rest = &html[start..];
    if let Some(body) = rest.strip_prefix("<!--") {
        let end = body.find("-->").map_or(html.len(), |p| start + 4 + p + 3);
        return Some(Tag {
            name: "",
            closing: false,
            end,
        });
    }
    let bytes = rest.as_bytes();
    let (closing, name_start) = match bytes.get(1)? {
        b'/' => (true, 2),
        b'!' | b'?' => {
            let end = rest.find('>').map_or(html.len(), |p| start + p + 1);
            return Some(Tag {
                name: "",
                closing: false,
                end,
            });
        }
        _ => (false, 1),
    };
    if !bytes.get(name_start)?.is_ascii_alphabetic() {
        return None;
    }
    let name_len = bytes[name_start..]
        .iter()
        .take_while(|b| b.is_ascii_alphanumeric() || **b == b'-')
        .count();
    let name = &rest[name_start..name_start + name_len];

    // Scan to the closing '>' outside attribute quotes.
    let mut quote: Option<u8> = None;
    for (off, &b) in bytes.iter().enumerate().skip(name_start + name_len) {
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => {
                return Some(Tag {
                    name,
                    closing,
                    end: start + off + 1,
                })
            }
            None => {}
        }
    }
    // Unterminated tag: swallow the rest of the input.
    Some(Tag {
        name,
        closing,
        end: html.len(),
    })
}

fn skip_raw_text(html: &str, from: usize, name: &str) -> usize {
    let bytes = html.as_bytes();
    let mut i = from;
    while let Some(p) = html[i..].find("</") {
        let at = i + p;
        let tail = &bytes[at + 2..];
        if tail.len() >= name.len() && tail[..name.len()].eq_ignore_ascii_case(name.as_bytes()) {
            return html[at..].find('>').map_or(html.len(), |q| at + q + 1);
        }
        i = at + 2;
    }
    html.len()
}

/// Decodes the entity at the start of `s` (which begins with `&`).
/// Returns the character and the number of bytes consumed; unknown
/// entities decode to a literal `&`.
fn decode_entity(s: &str) -> (char, usize) {
    let Some(semi) = s.as_bytes().iter().take(12).position(|&b| b == b';') else {
        return ('&', 1);
    };
    let body = &s[1..semi];
    let c = match body {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        _ => body.strip_prefix('#').and_then(|num| {
            let value = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok(),
                None => num.parse::<u32>().ok(),
            }?;
            Some(
                char::from_u32(value)
                    .filter(|&c| c != '\0')
                    .unwrap_or('\u{fffd}'),
            )
        }),
    };
    match c {
        Some(c) => (c, semi + 1),
        None => ('&', 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn strips_nested_tags() {
        assert_eq!(
            extract_paragraphs("<p>Hello <b>world</b></p>"),
            vec!["Hello world"]
        );
    }

    #[test]
    fn drops_boilerplate() {
        assert_eq!(
            extract_paragraphs("<div>nav</div><p>a&amp;b</p><p>c</p>"),
            vec!["a&b", "c"]
        );
    }

    #[test]
    fn eof_closes_paragraph() {
        assert_eq!(extract_paragraphs("<p>unclosed"), vec!["unclosed"]);
    }

    #[test]
    fn new_paragraph_closes_previous() {
        assert_eq!(extract_paragraphs("<p>one<p>two</p>"), vec!["one", "two"]);
    }

    #[test]
    fn attributes_case_and_lookalikes() {
        let html = r#"<P class="x>y">Upper</P><pre>code</pre><param name=p><p id='a'>ok</p>"#;
        assert_eq!(extract_paragraphs(html), vec!["Upper", "ok"]);
    }

    #[test]
    fn entities() {
        assert_eq!(
            extract_paragraphs("<p>&quot;q&quot; &#65;&#x42; &nbsp;x &bogus; &</p>"),
            vec!["\"q\" AB x &bogus; &"]
        );
        assert_eq!(extract_paragraphs("<p>a&lt;b&gt;c</p>"), vec!["a b c"]);
    }

    #[test]
    fn block_tags_separate_words() {
        assert_eq!(
            extract_paragraphs("<p>line<br>break</p>"),
            vec!["line break"]
        );
        assert_eq!(extract_paragraphs("<p>in<i>line</i></p>"), vec!["inline"]);
    }

    #[test]
    fn scripts_comments_and_stray_brackets() {
        let html =
            "<p>a<script>var x = '<p>no</p>';</script> b <!-- <p>hidden</p> --> c < d > e</p>";
        assert_eq!(extract_paragraphs(html), vec!["a b c d e"]);
    }

    #[test]
    fn empty_and_whitespace_paragraphs() {
        assert!(extract_paragraphs("").is_empty());
        assert!(extract_paragraphs("<div>only</div>").is_empty());
        assert!(extract_paragraphs("<p>   </p><p></p>").is_empty());
    }

    proptest! {
        #[test]
        fn never_emits_angle_brackets(html in "(<p>|</p>|<b>|<|>|&lt;|&gt;|&#60;|[a-z ]{0,5}|\\PC{0,3}){0,30}") {
            for p in extract_paragraphs(&html) {
                prop_assert!(!p.contains('<') && !p.contains('>'), "{:?}", p);
                prop_assert_eq!(p.trim(), p.as_str());
            }
        }
    }
}
