//! From raw web pages and tweets to cleaned, word-counted documents.

use alloc::string::{String, ToString};
use core::fmt;

mod clean;
mod dedup;
mod html;

pub use clean::{clean_text, count_words, is_cjk_ideograph};
pub use dedup::{dedup, DedupKey, Deduplicator};
pub use html::extract_paragraphs;

use crate::geo::{hostname, GeoError};

/// Shortest text, in code points, that survives the pipeline.
pub const MIN_TEXT_CHARS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Web,
    Twitter,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Web => "web",
            Source::Twitter => "twitter",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Source {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "web" => Ok(Source::Web),
            "twitter" => Ok(Source::Twitter),
            _ => Err(IngestError::UnknownSource),
        }
    }
}

/// One input record. `payload` is HTML for web pages and the tweet text
/// for tweets.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub id: String,
    pub source: Source,
    pub payload: String,
    pub url: Option<String>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    /// ISO-8601; only the leading `YYYY-MM` is used.
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CleanDocument {
    pub id: String,
    pub text: String,
    pub word_count: u64,
    /// Lowercased hostname for web pages, `"twitter"` for tweets.
    pub site: String,
    /// `YYYY-MM`.
    pub time_bucket: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IngestError {
    UnknownSource,
    MissingUrl,
    BadUrl(GeoError),
    MissingCoordinates,
    CoordinatesOutOfRange,
    BadTimestamp,
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::UnknownSource => f.write_str("source must be \"web\" or \"twitter\""),
            IngestError::MissingUrl => f.write_str("web record has no url"),
            IngestError::BadUrl(e) => write!(f, "bad url: {e}"),
            IngestError::MissingCoordinates => f.write_str("tweet has no lat/lon"),
            IngestError::CoordinatesOutOfRange => f.write_str("tweet coordinates out of range"),
            IngestError::BadTimestamp => f.write_str("timestamp does not start with YYYY-MM"),
        }
    }
}

impl core::error::Error for IngestError {}

/// `YYYY-MM` prefix of an ISO-8601 timestamp.
pub fn time_bucket(timestamp: &str) -> Result<&str, IngestError> {
    let b = timestamp.as_bytes();
    if b.len() < 7 || b[4] != b'-' || !b[..4].iter().chain(&b[5..7]).all(u8::is_ascii_digit) {
        return Err(IngestError::BadTimestamp);
    }
    if b.len() > 7 && b[7].is_ascii_digit() {
        return Err(IngestError::BadTimestamp);
    }
    let month = (b[5] - b'0') * 10 + (b[6] - b'0');
    if !(1..=12).contains(&month) {
        return Err(IngestError::BadTimestamp);
    }
    Ok(&timestamp[..7])
}

impl RawDocument {
    /// Checks the per-source required fields.
    pub fn validate(&self) -> Result<(), IngestError> {
        time_bucket(&self.timestamp)?;
        match self.source {
            Source::Web => {
                let url = self.url.as_deref().ok_or(IngestError::MissingUrl)?;
                hostname(url).map_err(IngestError::BadUrl)?;
            }
            Source::Twitter => {
                let (lat, lon) = self.coordinates().ok_or(IngestError::MissingCoordinates)?;
                if !((-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)) {
                    return Err(IngestError::CoordinatesOutOfRange);
                }
            }
        }
        Ok(())
    }

    pub fn coordinates(&self) -> Option<(f64, f64)> {
        Some((self.lat?, self.lon?))
    }
}

/// Extracts, cleans and word-counts one record. Web pages keep only their
/// `<p>` text, paragraphs joined by single spaces.
pub fn prepare(raw: &RawDocument) -> Result<CleanDocument, IngestError> {
    raw.validate()?;
    let (text, site) = match raw.source {
        Source::Web => {
            let body = extract_paragraphs(&raw.payload).join(" ");
            let host =
                hostname(raw.url.as_deref().unwrap_or_default()).map_err(IngestError::BadUrl)?;
            (clean_text(&body, Source::Web), host)
        }
        Source::Twitter => (
            clean_text(&raw.payload, Source::Twitter),
            "twitter".to_string(),
        ),
    };
    Ok(CleanDocument {
        id: raw.id.clone(),
        word_count: count_words(&text),
        text,
        site,
        time_bucket: time_bucket(&raw.timestamp)?.to_string(),
        source: raw.source,
    })
}

/// Whether `text` is long enough for language identification.
pub fn long_enough(text: &str, min_chars: usize) -> bool {
    text.chars().nth(min_chars.saturating_sub(1)).is_some() || min_chars == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn web(html: &str, url: &str) -> RawDocument {
        RawDocument {
            id: "w1".into(),
            source: Source::Web,
            payload: html.into(),
            url: Some(url.into()),
            lat: None,
            lon: None,
            timestamp: "2017-03-04T10:00:00Z".into(),
        }
    }

    #[test]
    fn time_buckets() {
        assert_eq!(time_bucket("2017-03-04T10:00:00Z"), Ok("2017-03"));
        assert_eq!(time_bucket("2019-12"), Ok("2019-12"));
        for bad in [
            "2017-13-01",
            "2017-00",
            "17-03-01",
            "2017/03",
            "2017-031",
            "",
        ] {
            assert_eq!(time_bucket(bad), Err(IngestError::BadTimestamp), "{bad}");
        }
    }

    #[test]
    fn prepare_web() {
        let raw = web(
            "<nav>menu</nav><p>Hello <b>there</b> https://a.b</p><p>你好</p>",
            "HTTPS://News.Example.CA/x",
        );
        let doc = prepare(&raw).unwrap();
        assert_eq!(doc.text, "Hello there 你好");
        assert_eq!(doc.word_count, 4);
        assert_eq!(doc.site, "news.example.ca");
        assert_eq!(doc.time_bucket, "2017-03");
        assert_eq!(doc.source, Source::Web);
    }

    #[test]
    fn prepare_twitter() {
        let raw = RawDocument {
            id: "t1".into(),
            source: Source::Twitter,
            payload: "@amy #great day".into(),
            url: None,
            lat: Some(-41.3),
            lon: Some(174.8),
            timestamp: "2018-07-01".into(),
        };
        let doc = prepare(&raw).unwrap();
        assert_eq!(doc.text, "great day");
        assert_eq!(doc.site, "twitter");
    }

    #[test]
    fn invalid_records() {
        let mut raw = web("<p>x</p>", "http://a.ca");
        raw.url = None;
        assert_eq!(prepare(&raw), Err(IngestError::MissingUrl));
        let raw = web("<p>x</p>", "http://");
        assert!(matches!(prepare(&raw), Err(IngestError::BadUrl(_))));
        let mut raw = web("<p>x</p>", "http://a.ca");
        raw.timestamp = "yesterday".into();
        assert_eq!(prepare(&raw), Err(IngestError::BadTimestamp));
        let tweet = RawDocument {
            id: "t".into(),
            source: Source::Twitter,
            payload: "x".into(),
            url: None,
            lat: Some(91.0),
            lon: Some(0.0),
            timestamp: "2018-01".into(),
        };
        assert_eq!(prepare(&tweet), Err(IngestError::CoordinatesOutOfRange));
        let tweet = RawDocument { lat: None, ..tweet };
        assert_eq!(prepare(&tweet), Err(IngestError::MissingCoordinates));
    }

    #[test]
    fn length_filter_counts_code_points() {
        let s: String = "é".repeat(50);
        assert!(long_enough(&s, 50));
        assert!(!long_enough(&s[..s.len() - 2], 50));
        assert!(long_enough("", 0));
    }
}
