//! Helpers shared by the integration tests: the bundled end-to-end fixture
//! and an oracle recount from its truth file.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use geocorpus::config::PipelineConfig;
use geocorpus::pipeline::{self, Manifest, PipelineError};
use serde::Deserialize;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

#[derive(Debug, Deserialize)]
pub struct TruthDoc {
    pub id: String,
    pub source: String,
    pub fate: String,
    pub country: Option<String>,
    pub lang: Option<String>,
    pub words: u64,
}

#[derive(Debug, Deserialize)]
pub struct Truth {
    pub docs_in: u64,
    pub docs_malformed: u64,
    pub docs_dropped_short: u64,
    pub docs_dropped_ungeolocated: u64,
    pub docs_dropped_dedup: u64,
    pub docs_emitted: u64,
    pub docs: Vec<TruthDoc>,
}

pub fn truth() -> Truth {
    let text = fs::read_to_string(fixture_dir().join("truth.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub type Table = BTreeMap<(String, String), u64>;

/// Expected word counts per (country, language), one pass over the truth
/// file, for one source or all of them.
pub fn oracle_counts(truth: &Truth, source: Option<&str>) -> Table {
    let mut out = Table::new();
    for d in &truth.docs {
        if d.fate != "emitted" || source.is_some_and(|s| s != d.source) {
            continue;
        }
        let key = (d.country.clone().unwrap(), d.lang.clone().unwrap());
        *out.entry(key).or_default() += d.words;
    }
    out
}

/// Parses an `iso3,lang,words` file by hand rather than through the
/// library reader.
pub fn parse_counts(path: &Path) -> Table {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iso3,lang,words"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 3, "{l}");
            ((f[0].to_string(), f[1].to_string()), f[2].parse().unwrap())
        })
        .collect()
}

pub fn fixture_config(out_dir: &Path, threads: Option<usize>) -> PipelineConfig {
    let mut config = PipelineConfig::load(&fixture_dir().join("pipeline.toml")).unwrap();
    config.report.output_dir = out_dir.to_path_buf();
    config.run.threads = threads;
    config
}

pub fn run_fixture(out_dir: &Path, threads: Option<usize>) -> Result<Manifest, PipelineError> {
    pipeline::run(&fixture_config(out_dir, threads), &fixture_dir())
}

/// Every file in `dir` by name.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

/// Drops the `generated_at` line so manifests can be compared byte for byte.
pub fn without_timestamp(manifest: &[u8]) -> String {
    let text = std::str::from_utf8(manifest).unwrap();
    let n = text
        .lines()
        .filter(|l| l.contains("\"generated_at\""))
        .count();
    assert_eq!(n, 1, "expected one timestamp line");
    text.lines()
        .filter(|l| !l.contains("\"generated_at\""))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Names of files whose bytes differ, with manifests compared minus their
/// timestamp.
pub fn differing_files(
    a: &BTreeMap<String, Vec<u8>>,
    b: &BTreeMap<String, Vec<u8>>,
) -> Vec<String> {
    let names: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    names
        .into_iter()
        .filter(|name| match (a.get(*name), b.get(*name)) {
            (Some(x), Some(y)) if name.as_str() == pipeline::MANIFEST_FILE => {
                without_timestamp(x) != without_timestamp(y)
            }
            (Some(x), Some(y)) => x != y,
            _ => true,
        })
        .cloned()
        .collect()
}
