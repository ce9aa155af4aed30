//! JSON-lines corpora and the ingest stage.
//!
//! Raw input, one record per line:
//!
//! ```text
//! {"id": "...", "source": "web", "url": "...", "html": "...", "ts": "2019-03-01T00:00:00Z"}
//! {"id": "...", "source": "twitter", "text": "...", "lat": -41.3, "lon": 174.8, "ts": "..."}
//! ```
//!
//! Cleaned output adds the country and word count and drops the markup.

use std::io::{self, BufRead, Write};

use geocorpus_core::geo::{CityIndex, TldTable};
use geocorpus_core::ingest::{self, CleanDocument, Deduplicator, RawDocument, Source};
use geocorpus_core::CountryCode;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Deserialize)]
struct RawLine {
    id: String,
    source: String,
    url: Option<String>,
    html: Option<String>,
    text: Option<String>,
    lat: Option<f64>,
    lon: Option<f64>,
    ts: String,
}

/// Parses and validates one raw record. The error is a short reason.
pub fn parse_raw_line(line: &str) -> Result<RawDocument, String> {
    let r: RawLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let source: Source = r
        .source
        .parse()
        .map_err(|e: ingest::IngestError| e.to_string())?;
    let payload = match source {
        Source::Web => r.html.ok_or("web record has no html")?,
        Source::Twitter => r.text.ok_or("tweet has no text")?,
    };
    let doc = RawDocument {
        id: r.id,
        source,
        payload,
        url: r.url,
        lat: r.lat,
        lon: r.lon,
        timestamp: r.ts,
    };
    doc.validate().map_err(|e| e.to_string())?;
    Ok(doc)
}

/// Country attribution: ccTLD for web pages, nearest city for tweets.
pub struct Geolocator {
    pub tld: TldTable,
    pub cities: Option<CityIndex>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestFailure {
    #[error("line {line}: tweet records need a city table")]
    NoCityTable { line: u64 },
    #[error("reading input: {0}")]
    Io(#[from] io::Error),
}

impl Geolocator {
    fn locate(&self, raw: &RawDocument, line: u64) -> Result<Option<CountryCode>, IngestFailure> {
        Ok(match raw.source {
            Source::Web => self
                .tld
                .tld_to_country(raw.url.as_deref().unwrap_or_default())
                .ok()
                .flatten(),
            Source::Twitter => {
                let idx = self
                    .cities
                    .as_ref()
                    .ok_or(IngestFailure::NoCityTable { line })?;
                let (lat, lon) = raw.coordinates().expect("validated");
                idx.assign(lat, lon).ok().flatten().map(|m| m.country())
            }
        })
    }
}

/// Where each input record ended up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounts {
    pub docs_in: u64,
    pub docs_malformed: u64,
    pub docs_dropped_short: u64,
    pub docs_dropped_ungeolocated: u64,
    pub docs_dropped_dedup: u64,
    pub docs_emitted: u64,
}

impl IngestCounts {
    pub fn is_balanced(&self) -> bool {
        self.docs_in
            == self.docs_emitted
                + self.docs_dropped_short
                + self.docs_dropped_dedup
                + self.docs_dropped_ungeolocated
                + self.docs_malformed
    }
}

/// One malformed input line, for the error log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Malformed {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct IngestOutput {
    pub docs: Vec<(CleanDocument, CountryCode)>,
    pub counts: IngestCounts,
    pub malformed: Vec<Malformed>,
}

enum Fate {
    Malformed(String),
    Short,
    Ungeolocated,
    Located(CleanDocument, CountryCode),
}

/// Runs parse, clean, length filter, geolocation and dedup over a raw
/// JSON-lines stream, in that order. Blank lines are ignored. Per-record
/// work runs on the current rayon pool; dedup keeps first occurrences in
/// input order.
pub fn ingest<R: BufRead>(
    input: R,
    geo: &Geolocator,
    min_chars: usize,
) -> Result<IngestOutput, IngestFailure> {
    let mut lines = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((i as u64 + 1, line));
        }
    }

    let fates: Vec<(u64, Fate)> = lines
        .par_iter()
        .map(|(n, line)| {
            let fate = match parse_raw_line(line) {
                Err(reason) => Fate::Malformed(reason),
                Ok(raw) => match ingest::prepare(&raw) {
                    Err(e) => Fate::Malformed(e.to_string()),
                    Ok(doc) if !ingest::long_enough(&doc.text, min_chars) => Fate::Short,
                    Ok(doc) => match geo.locate(&raw, *n)? {
                        Some(c) => Fate::Located(doc, c),
                        None => Fate::Ungeolocated,
                    },
                },
            };
            Ok((*n, fate))
        })
        .collect::<Result<_, IngestFailure>>()?;

    let mut out = IngestOutput::default();
    let mut seen = Deduplicator::new();
    out.counts.docs_in = fates.len() as u64;
    for (line, fate) in fates {
        match fate {
            Fate::Malformed(reason) => {
                out.counts.docs_malformed += 1;
                out.malformed.push(Malformed { line, reason });
            }
            Fate::Short => out.counts.docs_dropped_short += 1,
            Fate::Ungeolocated => out.counts.docs_dropped_ungeolocated += 1,
            Fate::Located(doc, c) => {
                if seen.admit(&doc, c) {
                    out.docs.push((doc, c));
                } else {
                    out.counts.docs_dropped_dedup += 1;
                }
            }
        }
    }
    out.counts.docs_emitted = out.docs.len() as u64;
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CleanLine {
    id: String,
    source: String,
    site: String,
    time_bucket: String,
    country: String,
    word_count: u64,
    text: String,
}

pub fn write_clean<W: Write>(docs: &[(CleanDocument, CountryCode)], mut out: W) -> io::Result<()> {
    for (doc, c) in docs {
        let line = CleanLine {
            id: doc.id.clone(),
            source: doc.source.as_str().to_string(),
            site: doc.site.clone(),
            time_bucket: doc.time_bucket.clone(),
            country: c.as_str().to_string(),
            word_count: doc.word_count,
            text: doc.text.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[derive(Debug, thiserror::Error)]
pub enum CleanReadError {
    #[error("line {line}: {message}")]
    Bad { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads cleaned documents back. Unlike raw input, any bad line is an
/// error: this file is our own output.
pub fn read_clean<R: BufRead>(
    input: R,
) -> Result<Vec<(CleanDocument, CountryCode)>, CleanReadError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| CleanReadError::Bad {
            line: i as u64 + 1,
            message,
        };
        let r: CleanLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let source = r
            .source
            .parse()
            .map_err(|e: ingest::IngestError| bad(e.to_string()))?;
        let country = CountryCode::new(&r.country).map_err(|e| bad(e.to_string()))?;
        out.push((
            CleanDocument {
                id: r.id,
                text: r.text,
                word_count: r.word_count,
                site: r.site,
                time_bucket: r.time_bucket,
                source,
            },
            country,
        ));
    }
    Ok(out)
}
