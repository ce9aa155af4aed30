//! Ground-truth tables: population with GDP and internet weightings, and
//! census language shares.
//!
//! Weighting is multiplicative. A country's expected text volume is taken
//! to be `population × gdp_per_capita` under [`WeightingMode::Gdp`] and
//! `population × internet_fraction` under [`WeightingMode::Internet`].

use alloc::collections::{BTreeMap, BTreeSet};
use core::fmt;
use core::str::FromStr;

use crate::geo::CountryCode;
use crate::lid::LanguageLabel;

/// Minimum census share for a language to count as used in a country.
pub const DEFAULT_INVENTORY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineError {
    BadValue(&'static str),
    DuplicateCountry(CountryCode),
    DuplicateCensusEntry(CountryCode, LanguageLabel),
    EmptyBaselines,
    NoCensusData(CountryCode),
    UnknownWeighting,
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::BadValue(what) => write!(f, "bad value: {what}"),
            BaselineError::DuplicateCountry(c) => write!(f, "country {c} listed twice"),
            BaselineError::DuplicateCensusEntry(c, l) => {
                write!(f, "census lists {l} twice for {c}")
            }
            BaselineError::EmptyBaselines => f.write_str("no baseline records"),
            BaselineError::NoCensusData(c) => write!(f, "no census data for {c}"),
            BaselineError::UnknownWeighting => {
                f.write_str("weighting must be one of raw, gdp, internet")
            }
        }
    }
}

impl core::error::Error for BaselineError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationRecord {
    pub country: CountryCode,
    pub population: u64,
    /// USD.
    pub gdp_per_capita: f64,
    pub internet_fraction: f64,
}

impl PopulationRecord {
    pub fn new(
        country: CountryCode,
        population: u64,
        gdp_per_capita: f64,
        internet_fraction: f64,
    ) -> Result<Self, BaselineError> {
        if population == 0 {
            return Err(BaselineError::BadValue("population must be positive"));
        }
        if !(gdp_per_capita.is_finite() && gdp_per_capita > 0.0) {
            return Err(BaselineError::BadValue("gdp_per_capita must be positive"));
        }
        if !(0.0..=1.0).contains(&internet_fraction) {
            return Err(BaselineError::BadValue(
                "internet_fraction must be in [0, 1]",
            ));
        }
        Ok(PopulationRecord {
            country,
            population,
            gdp_per_capita,
            internet_fraction,
        })
    }
}

/// Rejects repeated countries.
pub fn check_unique(records: &[PopulationRecord]) -> Result<(), BaselineError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.country) {
            return Err(BaselineError::DuplicateCountry(r.country));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WeightingMode {
    Raw,
    Gdp,
    Internet,
}

impl WeightingMode {
    pub const ALL: [WeightingMode; 3] = [
        WeightingMode::Raw,
        WeightingMode::Internet,
        WeightingMode::Gdp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            WeightingMode::Raw => "raw",
            WeightingMode::Gdp => "gdp",
            WeightingMode::Internet => "internet",
        }
    }
}

impl FromStr for WeightingMode {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(WeightingMode::Raw),
            "gdp" => Ok(WeightingMode::Gdp),
            "internet" => Ok(WeightingMode::Internet),
            _ => Err(BaselineError::UnknownWeighting),
        }
    }
}

impl fmt::Display for WeightingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unnormalized population vector under `mode`.
pub fn weight_population(
    records: &[PopulationRecord],
    mode: WeightingMode,
) -> Result<BTreeMap<CountryCode, f64>, BaselineError> {
    if records.is_empty() {
        return Err(BaselineError::EmptyBaselines);
    }
    Ok(records
        .iter()
        .map(|r| {
            let pop = r.population as f64;
            let w = match mode {
                WeightingMode::Raw => pop,
                WeightingMode::Gdp => pop * r.gdp_per_capita,
                WeightingMode::Internet => pop * r.internet_fraction,
            };
            (r.country, w)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusRecord {
    pub country: CountryCode,
    pub language: LanguageLabel,
    /// Fraction of the population using the language. Shares of one
    /// country need not sum to 1.
    pub population_share: f64,
}

impl CensusRecord {
    pub fn new(
        country: CountryCode,
        language: LanguageLabel,
        population_share: f64,
    ) -> Result<Self, BaselineError> {
        if !(0.0..=1.0).contains(&population_share) {
            return Err(BaselineError::BadValue("share must be in [0, 1]"));
        }
        Ok(CensusRecord {
            country,
            language,
            population_share,
        })
    }
}

/// Census shares indexed by country.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CensusTable {
    shares: BTreeMap<CountryCode, BTreeMap<LanguageLabel, f64>>,
}

impl CensusTable {
    pub fn new(records: &[CensusRecord]) -> Result<Self, BaselineError> {
        let mut shares: BTreeMap<CountryCode, BTreeMap<LanguageLabel, f64>> = BTreeMap::new();
        for r in records {
            let row = shares.entry(r.country).or_default();
            if row.insert(r.language, r.population_share).is_some() {
                return Err(BaselineError::DuplicateCensusEntry(r.country, r.language));
            }
        }
        Ok(CensusTable { shares })
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.shares.keys().copied()
    }

    pub fn shares(&self, country: CountryCode) -> Option<&BTreeMap<LanguageLabel, f64>> {
        self.shares.get(&country)
    }

    pub fn all_shares(&self) -> &BTreeMap<CountryCode, BTreeMap<LanguageLabel, f64>> {
        &self.shares
    }

    /// Languages whose share is at least `threshold`.
    pub fn census_language_set(
        &self,
        country: CountryCode,
        threshold: f64,
    ) -> Result<BTreeSet<LanguageLabel>, BaselineError> {
        let row = self
            .shares
            .get(&country)
            .ok_or(BaselineError::NoCensusData(country))?;
        Ok(row
            .iter()
            .filter(|(_, &s)| s >= threshold)
            .map(|(l, _)| *l)
            .collect())
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

impl FromIterator<(CountryCode, BTreeMap<LanguageLabel, f64>)> for CensusTable {
    fn from_iter<I: IntoIterator<Item = (CountryCode, BTreeMap<LanguageLabel, f64>)>>(
        iter: I,
    ) -> Self {
        CensusTable {
            shares: iter.into_iter().collect(),
        }
    }
}
