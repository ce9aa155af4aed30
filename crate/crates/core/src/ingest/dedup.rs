use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::CleanDocument;
use crate::geo::CountryCode;
use crate::hash::fnv1a64;

/// Two documents are duplicates exactly when their keys are equal: same
/// site, same month, same country and same text hash.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DedupKey {
    pub site: String,
    pub time_bucket: String,
    pub country: CountryCode,
    pub text_hash: u64,
}

impl DedupKey {
    pub fn of(doc: &CleanDocument, country: CountryCode) -> Self {
        DedupKey {
            site: doc.site.clone(),
            time_bucket: doc.time_bucket.clone(),
            country,
            text_hash: fnv1a64(doc.text.as_bytes()),
        }
    }
}

/// Insert-if-absent key set; keeps the first occurrence of every key.
#[derive(Debug, Clone, Default)]
pub struct Deduplicator {
    seen: BTreeSet<DedupKey>,
}

impl Deduplicator {
    pub fn new() -> Self {
        Self::default()
    }

    /// True if this is the first time the document's key is seen.
    pub fn admit(&mut self, doc: &CleanDocument, country: CountryCode) -> bool {
        self.seen.insert(DedupKey::of(doc, country))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// First occurrence of every key, in input order.
pub fn dedup<I>(docs: I) -> Vec<(CleanDocument, CountryCode)>
where
    I: IntoIterator<Item = (CleanDocument, CountryCode)>,
{
    let mut seen = Deduplicator::new();
    docs.into_iter()
        .filter(|(doc, country)| seen.admit(doc, *country))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Source;
    use alloc::format;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str, site: &str, month: &str) -> CleanDocument {
        CleanDocument {
            id: id.to_string(),
            text: text.to_string(),
            word_count: 1,
            site: site.to_string(),
            time_bucket: month.to_string(),
            source: Source::Web,
        }
    }

    fn c(code: &str) -> CountryCode {
        code.parse().unwrap()
    }

    #[test]
    fn drops_second_occurrence() {
        let out = dedup([
            (doc("1", "same", "a.nz", "2017-01"), c("NZL")),
            (doc("2", "same", "a.nz", "2017-01"), c("NZL")),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0.id, "1");
    }

    #[test]
    fn each_key_axis_separates() {
        let out = dedup([
            (doc("1", "same", "a.nz", "2017-01"), c("NZL")),
            (doc("2", "same", "a.nz", "2017-02"), c("NZL")),
            (doc("3", "same", "b.nz", "2017-01"), c("NZL")),
            (doc("4", "same", "a.nz", "2017-01"), c("AUS")),
            (doc("5", "other", "a.nz", "2017-01"), c("NZL")),
        ]);
        assert_eq!(out.len(), 5);
    }

    #[test]
    fn planted_duplicates() {
        // 900 distinct documents, then 100 repeats of every ninth one.
        let mut input: Vec<_> = (0..900)
            .map(|i| {
                (
                    doc(&format!("d{i}"), &format!("text {i}"), "s.ca", "2016-05"),
                    c("CAN"),
                )
            })
            .collect();
        for k in 0..100 {
            let (d, country) = input[k * 9].clone();
            input.insert(
                k * 10 + 5,
                (
                    CleanDocument {
                        id: format!("dup{k}"),
                        ..d
                    },
                    country,
                ),
            );
        }
        assert_eq!(input.len(), 1000);
        let out = dedup(input);
        assert_eq!(out.len(), 900);
        assert!(out.iter().all(|(d, _)| !d.id.starts_with("dup")));
    }

    proptest! {
        #[test]
        fn idempotent(items in proptest::collection::vec((0u8..5, 0u8..3, 0u8..2), 0..60)) {
            let docs: Vec<_> = items
                .iter()
                .enumerate()
                .map(|(i, (t, s, m))| {
                    let d = doc(&format!("{i}"), &format!("t{t}"), &format!("s{s}"), &format!("2017-0{}", m + 1));
                    (d, c("FRA"))
                })
                .collect();
            let once = dedup(docs);
            prop_assert_eq!(dedup(once.clone()), once);
        }
    }
}
