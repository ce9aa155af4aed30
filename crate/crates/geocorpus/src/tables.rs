//! CSV and TSV input tables: cities, ccTLDs, population baselines, census
//! shares and labelled training text.
//!
//! Every CSV needs a header row; columns are matched by name, so extra
//! columns and any column order are accepted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use geocorpus_core::baselines::{CensusRecord, PopulationRecord};
use geocorpus_core::geo::{CityRecord, TldTable, DEFAULT_EXCLUDED_TLDS};
use geocorpus_core::{CountryCode, LanguageLabel};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{origin}: {source}")]
    Io { origin: String, source: io::Error },
    #[error("{origin}: missing column `{column}`")]
    MissingColumn {
        origin: String,
        column: &'static str,
    },
    #[error("{origin}: line {line}: {message}")]
    BadValue {
        origin: String,
        line: u64,
        message: String,
    },
    #[error("{origin}: line {line}: country {country} listed twice")]
    DuplicateCountry {
        origin: String,
        line: u64,
        country: CountryCode,
    },
}

impl TableError {
    fn bad(origin: &str, line: u64, message: impl Into<String>) -> Self {
        TableError::BadValue {
            origin: origin.to_string(),
            line,
            message: message.into(),
        }
    }
}

fn open(path: &Path) -> Result<File, TableError> {
    File::open(path).map_err(|source| TableError::Io {
        origin: path.display().to_string(),
        source,
    })
}

/// Rows of the named columns, with the line each row came from.
fn read_columns<R: Read>(
    reader: R,
    origin: &str,
    columns: &[&'static str],
) -> Result<Vec<(u64, Vec<String>)>, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        TableError::bad(origin, line, e.to_string())
    };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let positions: Vec<usize> = columns
        .iter()
        .map(|&c| {
            headers
                .iter()
                .position(|h| h == c)
                .ok_or(TableError::MissingColumn {
                    origin: origin.to_string(),
                    column: c,
                })
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let fields = positions
            .iter()
            .map(|&i| rec.get(i).unwrap_or("").to_string())
            .collect();
        rows.push((line, fields));
    }
    Ok(rows)
}

fn country(origin: &str, line: u64, s: &str) -> Result<CountryCode, TableError> {
    CountryCode::known(s).map_err(|e| TableError::bad(origin, line, format!("{s:?}: {e}")))
}

fn language(origin: &str, line: u64, s: &str) -> Result<LanguageLabel, TableError> {
    s.parse()
        .map_err(|e| TableError::bad(origin, line, format!("{s:?}: {e}")))
}

fn number<T: std::str::FromStr>(
    origin: &str,
    line: u64,
    column: &str,
    s: &str,
) -> Result<T, TableError> {
    s.parse()
        .map_err(|_| TableError::bad(origin, line, format!("{column} {s:?} is not a number")))
}

/// `name,iso3,lat,lon`.
pub fn read_cities<R: Read>(reader: R, origin: &str) -> Result<Vec<CityRecord>, TableError> {
    read_columns(reader, origin, &["name", "iso3", "lat", "lon"])?
        .into_iter()
        .map(|(line, f)| {
            let lat = number(origin, line, "lat", &f[2])?;
            let lon = number(origin, line, "lon", &f[3])?;
            CityRecord::new(&f[0], country(origin, line, &f[1])?, lat, lon)
                .map_err(|e| TableError::bad(origin, line, e.to_string()))
        })
        .collect()
}

pub fn load_cities(path: &Path) -> Result<Vec<CityRecord>, TableError> {
    read_cities(open(path)?, &path.display().to_string())
}

/// `tld,iso3`. A leading dot on the TLD is ignored.
pub fn read_tld_map<R: Read>(
    reader: R,
    origin: &str,
) -> Result<BTreeMap<String, CountryCode>, TableError> {
    let mut out = BTreeMap::new();
    for (line, f) in read_columns(reader, origin, &["tld", "iso3"])? {
        let tld = f[0].trim_start_matches('.').to_ascii_lowercase();
        if tld.is_empty() {
            return Err(TableError::bad(origin, line, "empty tld"));
        }
        let c = country(origin, line, &f[1])?;
        if out.insert(tld.clone(), c).is_some() {
            return Err(TableError::bad(
                origin,
                line,
                format!("tld {tld} listed twice"),
            ));
        }
    }
    Ok(out)
}

/// Single-column list of excluded TLDs, under any header.
pub fn read_excluded<R: Read>(reader: R, origin: &str) -> Result<BTreeSet<String>, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| TableError::bad(origin, 0, e.to_string()))?;
        if let Some(t) = rec.get(0).filter(|t| !t.is_empty()) {
            out.insert(t.trim_start_matches('.').to_ascii_lowercase());
        }
    }
    Ok(out)
}

/// TLD table from an optional `tld,iso3` mapping (the built-in ISO ccTLD
/// table when absent). The default exclusions always apply, plus `extra`.
pub fn tld_table<E: IntoIterator<Item = String>>(
    mapping: Option<BTreeMap<String, CountryCode>>,
    extra: E,
) -> TldTable {
    let excluded = DEFAULT_EXCLUDED_TLDS
        .iter()
        .map(|s| s.to_string())
        .chain(extra);
    match mapping {
        Some(m) => TldTable::new(m, excluded),
        None => TldTable::builtin().with_excluded(excluded),
    }
}

pub fn load_tld_table(
    mapping: Option<&Path>,
    excluded: Option<&Path>,
) -> Result<TldTable, TableError> {
    let map = match mapping {
        Some(p) => Some(read_tld_map(open(p)?, &p.display().to_string())?),
        None => None,
    };
    let extra = match excluded {
        Some(p) => read_excluded(open(p)?, &p.display().to_string())?,
        None => BTreeSet::new(),
    };
    Ok(tld_table(map, extra))
}

/// `iso3,population,gdp_per_capita,internet_fraction`.
pub fn read_baselines<R: Read>(
    reader: R,
    origin: &str,
) -> Result<Vec<PopulationRecord>, TableError> {
    let cols = ["iso3", "population", "gdp_per_capita", "internet_fraction"];
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, f) in read_columns(reader, origin, &cols)? {
        let c = country(origin, line, &f[0])?;
        if !seen.insert(c) {
            return Err(TableError::DuplicateCountry {
                origin: origin.to_string(),
                line,
                country: c,
            });
        }
        let rec = PopulationRecord::new(
            c,
            number(origin, line, "population", &f[1])?,
            number(origin, line, "gdp_per_capita", &f[2])?,
            number(origin, line, "internet_fraction", &f[3])?,
        )
        .map_err(|e| TableError::bad(origin, line, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_baselines(path: &Path) -> Result<Vec<PopulationRecord>, TableError> {
    read_baselines(open(path)?, &path.display().to_string())
}

/// `iso3,lang,share`.
pub fn read_census<R: Read>(reader: R, origin: &str) -> Result<Vec<CensusRecord>, TableError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, f) in read_columns(reader, origin, &["iso3", "lang", "share"])? {
        let c = country(origin, line, &f[0])?;
        let l = language(origin, line, &f[1])?;
        if !seen.insert((c, l)) {
            return Err(TableError::bad(
                origin,
                line,
                format!("{c}/{l} listed twice"),
            ));
        }
        let share = number(origin, line, "share", &f[2])?;
        out.push(
            CensusRecord::new(c, l, share)
                .map_err(|e| TableError::bad(origin, line, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn load_census(path: &Path) -> Result<Vec<CensusRecord>, TableError> {
    read_census(open(path)?, &path.display().to_string())
}

/// `label<TAB>text`, one sample per line. Blank lines are skipped.
pub fn read_labelled_text<R: BufRead>(
    reader: R,
    origin: &str,
) -> Result<Vec<(String, LanguageLabel)>, TableError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i as u64 + 1;
        let line = line.map_err(|source| TableError::Io {
            origin: origin.to_string(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| TableError::bad(origin, n, "expected label<TAB>text"))?;
        out.push((text.to_string(), language(origin, n, label)?));
    }
    Ok(out)
}

pub fn load_labelled_text(path: &Path) -> Result<Vec<(String, LanguageLabel)>, TableError> {
    read_labelled_text(BufReader::new(open(path)?), &path.display().to_string())
}
