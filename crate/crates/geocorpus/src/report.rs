//! Report files: per-country CSVs, correlation JSON, geometry-free GeoJSON
//! and the language distribution bar chart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{self, Write};

use geocorpus_core::aggregate::GlobalLanguageTable;
use geocorpus_core::metrics::{CorrelationMatrix, InventoryReport, RepresentationScore};
use geocorpus_core::CountryCode;
use serde::{Deserialize, Serialize};

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Geojson,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "geojson" => Ok(Format::Geojson),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

pub const DEFAULT_TOP_K: usize = 100;
/// Bars taller than this share are clipped.
pub const DEFAULT_SVG_CAP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub formats: BTreeSet<Format>,
    pub top_k: usize,
    pub svg_cap: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            formats: [Format::Csv, Format::Json, Format::Geojson, Format::Svg].into(),
            top_k: DEFAULT_TOP_K,
            svg_cap: DEFAULT_SVG_CAP,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no values to map")]
    EmptyValues,
    #[error("language table has no rows")]
    EmptyTable,
    #[error("value for {0} is not finite")]
    NonFinite(CountryCode),
    #[error("top_k must be at least 1 and the cap positive")]
    BadOptions,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `iso3,score`.
pub fn write_scores_csv<W: Write>(scores: &[RepresentationScore], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iso3", "score"])?;
    for s in scores {
        w.write_record([s.country.as_str(), &s.score.to_string()])?;
    }
    w.flush()
}

/// `iso3,tpr,fp_count,fp_langs,truth_size`. `tpr` is empty when the census
/// lists no language above the threshold; `fp_langs` is `;`-separated.
pub fn write_inventory_csv<W: Write>(report: &InventoryReport, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iso3", "tpr", "fp_count", "fp_langs", "truth_size"])?;
    for r in &report.results {
        let fps: Vec<&str> = r.false_positives.iter().map(|l| l.as_str()).collect();
        w.write_record([
            r.country.as_str(),
            &r.tpr.map(|t| t.to_string()).unwrap_or_default(),
            &r.fp_count.to_string(),
            &fps.join(";"),
            &r.truth.len().to_string(),
        ])?;
    }
    w.flush()
}

#[derive(Serialize)]
struct CorrelationJson<'a> {
    variables: &'a [String],
    r: &'a [Vec<f64>],
    n_countries: usize,
    pair_counts: &'a [Vec<usize>],
    missing: BTreeMap<&'a str, Vec<&'a str>>,
}

pub fn correlation_json(m: &CorrelationMatrix) -> String {
    let doc = CorrelationJson {
        variables: &m.variables,
        r: &m.r,
        n_countries: m.n_countries,
        pair_counts: &m.pair_counts,
        missing: m
            .missing
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|c| c.as_str()).collect()))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data") + "\n"
}

#[derive(Serialize, Deserialize)]
struct Feature {
    #[serde(rename = "type")]
    kind: String,
    geometry: Option<()>,
    properties: Properties,
}

#[derive(Serialize, Deserialize)]
struct Properties {
    iso3: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct FeatureCollection {
    #[serde(rename = "type")]
    kind: String,
    features: Vec<Feature>,
}

/// A GeoJSON FeatureCollection with one null-geometry feature per country,
/// properties `{iso3, value}`. Mapping tools join on `iso3`.
pub fn choropleth(values: &BTreeMap<CountryCode, f64>) -> Result<String, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyValues);
    }
    let mut features = Vec::with_capacity(values.len());
    for (c, &v) in values {
        if !v.is_finite() {
            return Err(ReportError::NonFinite(*c));
        }
        features.push(Feature {
            kind: "Feature".into(),
            geometry: None,
            properties: Properties {
                iso3: c.as_str().into(),
                value: v,
            },
        });
    }
    let fc = FeatureCollection {
        kind: "FeatureCollection".into(),
        features,
    };
    Ok(serde_json::to_string_pretty(&fc).expect("finite floats") + "\n")
}

pub fn emit_choropleth<W: Write>(
    values: &BTreeMap<CountryCode, f64>,
    mut out: W,
) -> Result<(), ReportError> {
    out.write_all(choropleth(values)?.as_bytes())?;
    Ok(())
}

/// Parses a file written by [`choropleth`] back into its values.
pub fn parse_choropleth(text: &str) -> Result<BTreeMap<String, f64>, serde_json::Error> {
    let fc: FeatureCollection = serde_json::from_str(text)?;
    Ok(fc
        .features
        .into_iter()
        .map(|f| (f.properties.iso3, f.properties.value))
        .collect())
}

const BAR_W: f64 = 8.0;
const BAR_GAP: f64 = 2.0;
const PLOT_H: f64 = 300.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Bar chart of the `top_k` largest languages' corpus shares. The y axis
/// stops at `cap`; taller bars are clipped there and marked with a
/// triangle and their true share.
pub fn distribution_svg(
    table: &GlobalLanguageTable,
    top_k: usize,
    cap: f64,
) -> Result<String, ReportError> {
    if table.rows.is_empty() {
        return Err(ReportError::EmptyTable);
    }
    if top_k == 0 || !(cap.is_finite() && cap > 0.0) {
        return Err(ReportError::BadOptions);
    }
    let rows = &table.rows[..top_k.min(table.rows.len())];
    let width = LEFT + rows.len() as f64 * (BAR_W + BAR_GAP) + 20.0;
    let height = TOP + PLOT_H + BOTTOM;
    let base = TOP + PLOT_H;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        s,
        r#"<title>Top {} languages by share of words</title>"#,
        rows.len()
    );
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="#000"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="#000"/>"##,
        width - 10.0
    );
    for i in 0..=4 {
        let v = cap * i as f64 / 4.0;
        let y = base - PLOT_H * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{}" y="{y}" font-size="10" text-anchor="end">{:.2}%</text>"#,
            LEFT - 4.0,
            v * 100.0
        );
    }
    for (i, row) in rows.iter().enumerate() {
        let x = LEFT + BAR_GAP + i as f64 * (BAR_W + BAR_GAP);
        let clipped = row.share > cap;
        let h = PLOT_H * row.share.min(cap) / cap;
        let _ = writeln!(
            s,
            r##"<rect class="bar" data-lang="{}" data-share="{}" x="{x}" y="{}" width="{BAR_W}" height="{h}" fill="#4c72b0"><title>{} {:.3}%</title></rect>"##,
            row.label,
            row.share,
            base - h,
            row.label,
            row.share * 100.0
        );
        if clipped {
            let (cx, ty) = (x + BAR_W / 2.0, TOP - 2.0);
            let _ = writeln!(
                s,
                r##"<path class="overflow" data-lang="{}" d="M {} {} L {cx} {} L {} {} Z" fill="#c44e52"/>"##,
                row.label,
                x,
                ty,
                ty - 6.0,
                x + BAR_W,
                ty
            );
            let _ = writeln!(
                s,
                r#"<text class="overflow-label" x="{cx}" y="{}" font-size="9" text-anchor="middle">{:.1}%</text>"#,
                ty - 8.0,
                row.share * 100.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="label" x="{cx}" y="{}" font-size="7" text-anchor="end" transform="rotate(-90 {cx} {})">{}</text>"#,
            base + 4.0,
            base + 4.0,
            row.label,
            cx = x + BAR_W / 2.0 + 2.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_distribution_svg<W: Write>(
    table: &GlobalLanguageTable,
    options: &ReportOptions,
    mut out: W,
) -> Result<(), ReportError> {
    out.write_all(distribution_svg(table, options.top_k, options.svg_cap)?.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct LanguageJson {
    rank: usize,
    lang: String,
    words: u64,
    share: f64,
}

/// `rank,lang,words,share` for the thresholded rows.
pub fn write_languages_csv<W: Write>(table: &GlobalLanguageTable, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &table.rows {
        w.serialize(LanguageJson {
            rank: table.rank_of(row.label).expect("row is ranked"),
            lang: row.label.to_string(),
            words: row.words,
            share: row.share,
        })?;
    }
    w.flush()
}

/// Thresholded rows plus cumulative shares of the top 1..=top_k languages.
pub fn languages_json(table: &GlobalLanguageTable, top_k: usize) -> String {
    #[derive(Serialize)]
    struct Doc {
        total_words: u64,
        n_languages: usize,
        rows: Vec<LanguageJson>,
        top_k_share: Vec<f64>,
    }
    let doc = Doc {
        total_words: table.total_words,
        n_languages: table.ranking.len(),
        rows: table
            .rows
            .iter()
            .map(|r| LanguageJson {
                rank: table.rank_of(r.label).expect("row is ranked"),
                lang: r.label.to_string(),
                words: r.words,
                share: r.share,
            })
            .collect(),
        top_k_share: (1..=top_k.min(table.ranking.len()))
            .map(|k| table.top_k_share(k))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data") + "\n"
}
