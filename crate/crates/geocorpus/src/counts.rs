//! Language labelling, word-count aggregation and the counts CSV format.

use std::io::{self, Read, Write};

use geocorpus_core::ingest::{CleanDocument, Source};
use geocorpus_core::lid::LidError;
use geocorpus_core::{CountryCode, CountryLanguageCounts, LanguageLabel, LidModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Counts for the whole corpus and for each source separately.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceCounts {
    pub all: CountryLanguageCounts,
    pub web: CountryLanguageCounts,
    pub twitter: CountryLanguageCounts,
}

impl SourceCounts {
    pub fn add(&mut self, doc: &CleanDocument, country: CountryCode, lang: LanguageLabel) {
        self.all.accumulate(doc, country, lang);
        match doc.source {
            Source::Web => self.web.accumulate(doc, country, lang),
            Source::Twitter => self.twitter.accumulate(doc, country, lang),
        }
    }

    pub fn merge(mut self, other: &SourceCounts) -> Self {
        self.all.merge_from(&other.all);
        self.web.merge_from(&other.web);
        self.twitter.merge_from(&other.twitter);
        self
    }
}

#[derive(Debug, thiserror::Error)]
#[error("document {id}: {source}")]
pub struct LabelError {
    pub id: String,
    pub source: LidError,
}

/// Predicts every document's language and folds the word counts. Runs on
/// the current rayon pool; workers keep private counts that are merged at
/// the end, so the result does not depend on scheduling.
pub fn label_and_count(
    docs: &[(CleanDocument, CountryCode)],
    model: &LidModel,
) -> Result<SourceCounts, LabelError> {
    docs.par_iter()
        .try_fold(SourceCounts::default, |mut acc, (doc, country)| {
            let (lang, _) = model.predict(&doc.text).map_err(|source| LabelError {
                id: doc.id.clone(),
                source,
            })?;
            acc.add(doc, *country, lang);
            Ok(acc)
        })
        .try_reduce(SourceCounts::default, |a, b| Ok(a.merge(&b)))
}

#[derive(Serialize, Deserialize)]
struct Row {
    iso3: String,
    lang: String,
    words: u64,
}

/// `iso3,lang,words`, ordered by country then language.
pub fn write_counts_csv<W: Write>(counts: &CountryLanguageCounts, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (c, l, words) in counts.iter() {
        w.serialize(Row {
            iso3: c.as_str().to_string(),
            lang: l.as_str().to_string(),
            words,
        })?;
    }
    w.flush()
}

#[derive(Debug, thiserror::Error)]
pub enum CountsReadError {
    #[error("line {line}: {message}")]
    Bad { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads a counts CSV. The document count is not stored in the CSV; see
/// [`CountsSidecar`].
pub fn read_counts_csv<R: Read>(input: R) -> Result<CountryLanguageCounts, CountsReadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut counts = CountryLanguageCounts::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| CountsReadError::Bad {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let c = CountryCode::new(&row.iso3).map_err(|e| CountsReadError::Bad {
            line: 0,
            message: format!("{}: {e}", row.iso3),
        })?;
        let l: LanguageLabel = row
            .lang
            .parse()
            .map_err(|e: LidError| CountsReadError::Bad {
                line: 0,
                message: format!("{}: {e}", row.lang),
            })?;
        counts.add_words(c, l, row.words);
    }
    Ok(counts)
}

/// JSON written next to a counts CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsSidecar {
    pub total_words: u64,
    pub n_docs: u64,
    pub n_countries: usize,
    pub n_languages: usize,
    pub model_labels: Vec<String>,
    pub min_chars: u32,
}

impl CountsSidecar {
    pub fn new(counts: &CountryLanguageCounts, model: &LidModel) -> Self {
        CountsSidecar {
            total_words: counts.total_words(),
            n_docs: counts.n_docs(),
            n_countries: counts.countries().len(),
            n_languages: counts.words_by_language().len(),
            model_labels: model.labels().iter().map(|l| l.to_string()).collect(),
            min_chars: model.config().min_chars,
        }
    }
}
