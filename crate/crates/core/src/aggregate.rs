//! The (country, language) word-count matrix and the tables derived from it.
//!
//! [`CountryLanguageCounts`] is a commutative monoid under
//! [`CountryLanguageCounts::merge`] with the empty matrix as identity, so
//! workers can count disjoint slices of a corpus and combine the results in
//! any order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::geo::CountryCode;
use crate::ingest::CleanDocument;
use crate::lid::LanguageLabel;

/// Languages with fewer words than this are dropped from global tables.
pub const DEFAULT_MIN_WORDS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregateError {
    NoDataForCountry(CountryCode),
    EmptyCounts,
    InvalidThreshold,
}

impl fmt::Display for AggregateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateError::NoDataForCountry(c) => write!(f, "no words counted for {c}"),
            AggregateError::EmptyCounts => f.write_str("no words counted"),
            AggregateError::InvalidThreshold => f.write_str("share threshold must be in [0, 1]"),
        }
    }
}

impl core::error::Error for AggregateError {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountryLanguageCounts {
    counts: BTreeMap<(CountryCode, LanguageLabel), u64>,
    total_words: u64,
    n_docs: u64,
}

impl CountryLanguageCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one labelled document.
    pub fn accumulate(&mut self, doc: &CleanDocument, country: CountryCode, lang: LanguageLabel) {
        self.add_words(country, lang, doc.word_count);
        self.n_docs += 1;
    }

    /// Adds words without counting a document (used when loading totals).
    pub fn add_words(&mut self, country: CountryCode, lang: LanguageLabel, words: u64) {
        *self.counts.entry((country, lang)).or_insert(0) += words;
        self.total_words += words;
    }

    pub fn set_n_docs(&mut self, n_docs: u64) {
        self.n_docs = n_docs;
    }

    pub fn merge(mut self, other: &CountryLanguageCounts) -> Self {
        self.merge_from(other);
        self
    }

    pub fn merge_from(&mut self, other: &CountryLanguageCounts) {
        for (&key, &words) in &other.counts {
            *self.counts.entry(key).or_insert(0) += words;
        }
        self.total_words += other.total_words;
        self.n_docs += other.n_docs;
    }

    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, country: CountryCode, lang: LanguageLabel) -> u64 {
        self.counts.get(&(country, lang)).copied().unwrap_or(0)
    }

    /// Cells ordered by country, then language.
    pub fn iter(&self) -> impl Iterator<Item = (CountryCode, LanguageLabel, u64)> + '_ {
        self.counts.iter().map(|(&(c, l), &w)| (c, l, w))
    }

    pub fn countries(&self) -> BTreeSet<CountryCode> {
        self.counts.keys().map(|(c, _)| *c).collect()
    }

    /// Total words per country.
    pub fn words_by_country(&self) -> BTreeMap<CountryCode, u64> {
        let mut out = BTreeMap::new();
        for (&(c, _), &w) in &self.counts {
            *out.entry(c).or_insert(0) += w;
        }
        out
    }

    /// Total words per language.
    pub fn words_by_language(&self) -> BTreeMap<LanguageLabel, u64> {
        let mut out = BTreeMap::new();
        for (&(_, l), &w) in &self.counts {
            *out.entry(l).or_insert(0) += w;
        }
        out
    }

    /// Each language's fraction of `country`'s words.
    pub fn country_language_shares(
        &self,
        country: CountryCode,
    ) -> Result<BTreeMap<LanguageLabel, f64>, AggregateError> {
        let cells: Vec<(LanguageLabel, u64)> = self
            .counts
            .range((country, LanguageLabel::MIN)..=(country, LanguageLabel::MAX))
            .map(|(&(_, l), &w)| (l, w))
            .collect();
        let total: u64 = cells.iter().map(|(_, w)| w).sum();
        if total == 0 {
            return Err(AggregateError::NoDataForCountry(country));
        }
        Ok(cells
            .into_iter()
            .map(|(l, w)| (l, w as f64 / total as f64))
            .collect())
    }

    /// Language shares for every country that has words.
    pub fn all_country_shares(&self) -> BTreeMap<CountryCode, BTreeMap<LanguageLabel, f64>> {
        self.countries()
            .into_iter()
            .filter_map(|c| self.country_language_shares(c).ok().map(|s| (c, s)))
            .collect()
    }

    /// Ranks languages by corpus-wide words. Shares are fractions of the
    /// whole corpus, computed before `threshold` trims the rows.
    pub fn global_table(
        &self,
        threshold: LanguageThreshold,
    ) -> Result<GlobalLanguageTable, AggregateError> {
        if self.total_words == 0 {
            return Err(AggregateError::EmptyCounts);
        }
        if let LanguageThreshold::CountryShare(f) = threshold {
            if !(0.0..=1.0).contains(&f) {
                return Err(AggregateError::InvalidThreshold);
            }
        }
        let total = self.total_words as f64;
        let mut ranking: Vec<LanguageRow> = self
            .words_by_language()
            .into_iter()
            .map(|(label, words)| LanguageRow {
                label,
                words,
                share: words as f64 / total,
            })
            .collect();
        ranking.sort_by(|a, b| b.words.cmp(&a.words).then(a.label.cmp(&b.label)));

        let keep: BTreeSet<LanguageLabel> = match threshold {
            LanguageThreshold::MinWords(min) => ranking
                .iter()
                .filter(|r| r.words >= min)
                .map(|r| r.label)
                .collect(),
            LanguageThreshold::CountryShare(f) => self
                .all_country_shares()
                .values()
                .flat_map(|s| s.iter().filter(|(_, &v)| v >= f).map(|(l, _)| *l))
                .collect(),
        };
        let rows = ranking
            .iter()
            .filter(|r| keep.contains(&r.label))
            .copied()
            .collect();
        Ok(GlobalLanguageTable {
            rows,
            ranking,
            threshold,
            total_words: self.total_words,
        })
    }
}

/// How [`CountryLanguageCounts::global_table`] decides which languages to
/// list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LanguageThreshold {
    /// At least this many words corpus-wide.
    MinWords(u64),
    /// At least this fraction of some country's words.
    CountryShare(f64),
}

impl Default for LanguageThreshold {
    fn default() -> Self {
        LanguageThreshold::MinWords(DEFAULT_MIN_WORDS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanguageRow {
    pub label: LanguageLabel,
    pub words: u64,
    /// Fraction of all words in the corpus.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalLanguageTable {
    /// Languages passing the threshold, most words first.
    pub rows: Vec<LanguageRow>,
    /// Every language, most words first (ties by label).
    pub ranking: Vec<LanguageRow>,
    pub threshold: LanguageThreshold,
    pub total_words: u64,
}

impl GlobalLanguageTable {
    /// Combined share of the `k` largest languages, over the untrimmed
    /// ranking.
    pub fn top_k_share(&self, k: usize) -> f64 {
        self.ranking
            .iter()
            .take(k)
            .map(|r| r.share)
            .sum::<f64>()
            .min(1.0)
    }

    /// Rank (1-based) of `label` in the untrimmed ranking.
    pub fn rank_of(&self, label: LanguageLabel) -> Option<usize> {
        self.ranking
            .iter()
            .position(|r| r.label == label)
            .map(|i| i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Source;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(s: &str) -> CountryCode {
        s.parse().unwrap()
    }
    fn l(s: &str) -> LanguageLabel {
        s.parse().unwrap()
    }
    fn doc(words: u64) -> CleanDocument {
        CleanDocument {
            id: "d".to_string(),
            text: "x".to_string(),
            word_count: words,
            site: "s".to_string(),
            time_bucket: "2017-01".to_string(),
            source: Source::Web,
        }
    }

    #[test]
    fn accumulate_basics() {
        let mut m = CountryLanguageCounts::new();
        m.accumulate(&doc(5), c("NZL"), l("eng"));
        assert_eq!(m.get(c("NZL"), l("eng")), 5);
        assert_eq!(m.total_words(), 5);
        m.accumulate(&doc(7), c("NZL"), l("eng"));
        assert_eq!(m.get(c("NZL"), l("eng")), 12);
        assert_eq!(m.n_docs(), 2);
    }

    #[test]
    fn accumulate_matches_recount() {
        let countries = [c("NZL"), c("AUS"), c("FJI"), c("WSM")];
        let langs = [l("eng"), l("mri"), l("smo"), l("fij"), l("hin")];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let docs: Vec<_> = (0..1000)
            .map(|_| {
                (
                    rng.gen_range(0..500u64),
                    rng.gen_range(0..countries.len()),
                    rng.gen_range(0..langs.len()),
                )
            })
            .collect();
        let mut m = CountryLanguageCounts::new();
        for &(w, ci, li) in &docs {
            m.accumulate(&doc(w), countries[ci], langs[li]);
        }
        let mut oracle = [[0u64; 5]; 4];
        for &(w, ci, li) in &docs {
            oracle[ci][li] += w;
        }
        for (ci, row) in oracle.iter().enumerate() {
            for (li, &w) in row.iter().enumerate() {
                assert_eq!(m.get(countries[ci], langs[li]), w);
            }
        }
        assert_eq!(m.total_words(), docs.iter().map(|d| d.0).sum::<u64>());
        assert_eq!(m.n_docs(), 1000);
    }

    #[test]
    fn shares() {
        let mut m = CountryLanguageCounts::new();
        m.add_words(c("FRA"), l("eng"), 75);
        m.add_words(c("FRA"), l("fra"), 25);
        m.add_words(c("ISL"), l("isl"), 9);
        let s = m.country_language_shares(c("FRA")).unwrap();
        assert_eq!(
            s,
            [(l("eng"), 0.75), (l("fra"), 0.25)].into_iter().collect()
        );
        let s = m.country_language_shares(c("ISL")).unwrap();
        assert_eq!(s[&l("isl")], 1.0);
        assert_eq!(
            m.country_language_shares(c("DEU")),
            Err(AggregateError::NoDataForCountry(c("DEU")))
        );
        m.add_words(c("DEU"), l("deu"), 0);
        assert!(m.country_language_shares(c("DEU")).is_err());
    }

    #[test]
    fn random_shares_match_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut m = CountryLanguageCounts::new();
        let langs = ["aaa", "bbb", "ccc", "ddd"];
        let mut raw = vec![];
        for lang in langs {
            let w = rng.gen_range(1..10_000u64);
            raw.push(w);
            m.add_words(c("BRA"), l(lang), w);
        }
        let total: u64 = raw.iter().sum();
        let s = m.country_language_shares(c("BRA")).unwrap();
        for (i, lang) in langs.iter().enumerate() {
            assert_eq!(s[&l(lang)], raw[i] as f64 / total as f64);
        }
        assert!((s.values().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn global_table_english_like_leader() {
        // 299 of 1000 words: rank 1 with share 0.299.
        let mut m = CountryLanguageCounts::new();
        m.add_words(c("USA"), l("eng"), 200);
        m.add_words(c("GBR"), l("eng"), 99);
        m.add_words(c("ESP"), l("spa"), 250);
        m.add_words(c("MEX"), l("spa"), 10);
        m.add_words(c("RUS"), l("rus"), 241);
        m.add_words(c("FRA"), l("fra"), 200);
        let t = m.global_table(LanguageThreshold::MinWords(0)).unwrap();
        assert_eq!(t.rows[0].label, l("eng"));
        assert_eq!(t.rows[0].share, 0.299);
        assert_eq!(t.rank_of(l("eng")), Some(1));
        assert_eq!(t.rank_of(l("fra")), Some(4));
    }

    #[test]
    fn threshold_trims_after_shares() {
        let mut m = CountryLanguageCounts::new();
        m.add_words(c("USA"), l("eng"), 60);
        m.add_words(c("USA"), l("spa"), 40);
        let t = m.global_table(LanguageThreshold::MinWords(1_000)).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.ranking[0].share, 0.6);
        assert_eq!(t.top_k_share(2), 1.0);

        let empty = CountryLanguageCounts::new();
        assert_eq!(
            empty.global_table(LanguageThreshold::default()),
            Err(AggregateError::EmptyCounts)
        );
    }

    #[test]
    fn country_share_threshold() {
        let mut m = CountryLanguageCounts::new();
        // mri is tiny globally but 10% of NZL.
        m.add_words(c("NZL"), l("eng"), 90);
        m.add_words(c("NZL"), l("mri"), 10);
        m.add_words(c("USA"), l("eng"), 10_000);
        m.add_words(c("USA"), l("fra"), 100);
        let t = m
            .global_table(LanguageThreshold::CountryShare(0.05))
            .unwrap();
        let kept: Vec<_> = t.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(kept, ["eng", "mri"]);
        assert!(m
            .global_table(LanguageThreshold::CountryShare(1.5))
            .is_err());
    }

    #[test]
    fn thirty_language_ranking() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut m = CountryLanguageCounts::new();
        let mut words = BTreeMap::new();
        for i in 0..30u8 {
            let label = LanguageLabel::from_bytes([b'a' + i % 26, b'a' + i / 26, b'x']);
            for country in ["CHN", "IND", "BRA"] {
                let w = rng.gen_range(0..1_000_000u64);
                m.add_words(c(country), label, w);
                *words.entry(label).or_insert(0u64) += w;
            }
        }
        let t = m
            .global_table(LanguageThreshold::MinWords(DEFAULT_MIN_WORDS))
            .unwrap();
        // Oracle: sort by words descending, prefix sums.
        let mut sorted: Vec<(LanguageLabel, u64)> = words.into_iter().collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let total: u64 = sorted.iter().map(|x| x.1).sum();
        let ranked: Vec<_> = t.ranking.iter().map(|r| (r.label, r.words)).collect();
        assert_eq!(ranked, sorted);
        let top20: f64 = sorted[..20].iter().map(|x| x.1 as f64 / total as f64).sum();
        assert!((t.top_k_share(20) - top20).abs() < 1e-12);
        assert!(t.rows.iter().all(|r| r.words >= DEFAULT_MIN_WORDS));
        let mut prev = 0.0;
        for k in 0..=31 {
            let s = t.top_k_share(k);
            assert!(s >= prev && s <= 1.0);
            prev = s;
        }
        assert!((t.ranking.iter().map(|r| r.share).sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    fn counts_strategy() -> impl Strategy<Value = CountryLanguageCounts> {
        proptest::collection::vec((0usize..4, 0usize..4, 0u64..1000), 0..20).prop_map(|cells| {
            let cs = ["ARG", "CHL", "PER", "URY"];
            let ls = ["spa", "eng", "que", "grn"];
            let mut m = CountryLanguageCounts::new();
            for (ci, li, w) in cells {
                m.add_words(c(cs[ci]), l(ls[li]), w);
                m.n_docs += 1;
            }
            m
        })
    }

    proptest! {
        #[test]
        fn monoid_laws(a in counts_strategy(), b in counts_strategy(), x in counts_strategy()) {
            let e = CountryLanguageCounts::new();
            prop_assert_eq!(a.clone().merge(&e), a.clone());
            prop_assert_eq!(a.clone().merge(&b), b.clone().merge(&a));
            prop_assert_eq!(a.clone().merge(&b).merge(&x), a.clone().merge(&b.clone().merge(&x)));
        }

        #[test]
        fn shares_sum_to_one(m in counts_strategy()) {
            for s in m.all_country_shares().values() {
                prop_assert!((s.values().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }
    }
}
