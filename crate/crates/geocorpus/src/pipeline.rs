//! The full `run`: ingest → geolocate → predict → aggregate → audit →
//! report, plus a manifest describing the run.
//!
//! Every input is loaded before any work starts, so a missing or broken
//! file fails fast and is attributed to the stage that needs it.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use geocorpus_core::baselines::{weight_population, CensusTable, PopulationRecord, WeightingMode};
use geocorpus_core::geo::CityIndex;
use geocorpus_core::ingest::MIN_TEXT_CHARS;
use geocorpus_core::lid::{self, LidModel};
use geocorpus_core::metrics::{self, correlation_matrix, inventory_eval, representation_scores};
use geocorpus_core::{CountryCode, CountryLanguageCounts};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{resolve, AuditStage, PipelineConfig};
use crate::corpus::{self, Geolocator, IngestCounts, IngestFailure, Malformed};
use crate::counts::{label_and_count, write_counts_csv, CountsSidecar, SourceCounts};
use crate::model_file;
use crate::report::{self, Format};
use crate::tables;

pub const THREADS_ENV: &str = "GEOCORPUS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Ingest,
    Geolocate,
    Lid,
    Aggregate,
    Correlate,
    Represent,
    Inventory,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

impl From<AuditStage> for Stage {
    fn from(s: AuditStage) -> Self {
        match s {
            AuditStage::Correlate => Stage::Correlate,
            AuditStage::Represent => Stage::Represent,
            AuditStage::Inventory => Stage::Inventory,
        }
    }
}

/// A failed run. Serializes to the machine-readable error report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
    /// The record or file the failure concerns, when there is one.
    pub context: Option<String>,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl ToString) -> Self {
        PipelineError {
            stage,
            message: message.to_string(),
            context: None,
        }
    }

    fn at(mut self, context: impl ToString) -> Self {
        self.context = Some(context.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            status: &'static str,
            #[serde(flatten)]
            error: &'a PipelineError,
        }
        serde_json::to_string_pretty(&Report {
            status: "error",
            error: self,
        })
        .expect("plain data")
            + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    /// `"file"` or `"trained"`.
    pub origin: String,
    pub labels: Vec<String>,
    pub feature_dim: u32,
    pub hidden_dim: u32,
    pub min_chars: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// The only field that changes between identical runs.
    pub generated_at: String,
    pub config: PipelineConfig,
    pub inputs: BTreeMap<String, InputDigest>,
    pub model: ModelSummary,
    pub counts: IngestCounts,
    pub words_total: u64,
    pub malformed: Vec<Malformed>,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ERROR_FILE: &str = "error.json";

struct Input {
    role: &'static str,
    bytes: Vec<u8>,
    path: PathBuf,
}

fn read_input(
    stage: Stage,
    role: &'static str,
    base: &Path,
    p: &Path,
    inputs: &mut BTreeMap<String, InputDigest>,
) -> Result<Input, PipelineError> {
    let path = resolve(base, p);
    let bytes = fs::read(&path).map_err(|e| {
        PipelineError::new(stage, format!("cannot read {role} file: {e}")).at(p.display())
    })?;
    inputs.insert(
        role.to_string(),
        InputDigest {
            path: p.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        },
    );
    Ok(Input { role, bytes, path })
}

fn origin(i: &Input) -> String {
    format!("{} ({})", i.path.display(), i.role)
}

/// Worker count: `GEOCORPUS_THREADS`, then the config, then all cores.
pub fn worker_threads(configured: Option<usize>) -> Result<usize, PipelineError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(PipelineError::new(
                Stage::Config,
                format!("{THREADS_ENV} must be a positive integer, got {v:?}"),
            )),
        },
        Err(_) => Ok(configured
            .filter(|&n| n > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))),
    }
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipelineError::new(Stage::Config, e))
}

struct Loaded {
    corpus: Input,
    model: LidModel,
    model_origin: &'static str,
    geo: Geolocator,
    baselines: Option<Vec<PopulationRecord>>,
    census: Option<CensusTable>,
}

fn load(
    config: &PipelineConfig,
    base: &Path,
    inputs: &mut BTreeMap<String, InputDigest>,
) -> Result<Loaded, PipelineError> {
    let corpus = read_input(Stage::Ingest, "corpus", base, &config.input.corpus, inputs)?;

    let geo_err = |e: tables::TableError| PipelineError::new(Stage::Geolocate, e);
    let cities = match &config.geo.cities {
        Some(p) => {
            let i = read_input(Stage::Geolocate, "cities", base, p, inputs)?;
            let list = tables::read_cities(i.bytes.as_slice(), &origin(&i)).map_err(geo_err)?;
            Some(
                CityIndex::new(list, config.geo.radius_km)
                    .map_err(|e| PipelineError::new(Stage::Geolocate, e).at(p.display()))?,
            )
        }
        None => None,
    };
    let tld_map = match &config.geo.tld {
        Some(p) => {
            let i = read_input(Stage::Geolocate, "tld", base, p, inputs)?;
            Some(tables::read_tld_map(i.bytes.as_slice(), &origin(&i)).map_err(geo_err)?)
        }
        None => None,
    };
    let mut excluded = Vec::new();
    if let Some(p) = &config.geo.excluded {
        let i = read_input(Stage::Geolocate, "excluded", base, p, inputs)?;
        excluded.extend(tables::read_excluded(i.bytes.as_slice(), &origin(&i)).map_err(geo_err)?);
    }
    let tld = tables::tld_table(tld_map, excluded);

    let lid_cfg = config.lid.model_config();
    let (model, model_origin) = match (&config.lid.model, &config.lid.train) {
        (Some(p), None) => {
            let i = read_input(Stage::Lid, "model", base, p, inputs)?;
            let m = model_file::read_model(&i.bytes)
                .map_err(|e| PipelineError::new(Stage::Lid, e).at(p.display()))?;
            (m, "file")
        }
        (None, Some(p)) => {
            let i = read_input(Stage::Lid, "train", base, p, inputs)?;
            let samples = tables::read_labelled_text(i.bytes.as_slice(), &origin(&i))
                .map_err(|e| PipelineError::new(Stage::Lid, e))?;
            let m = lid::train(&samples, &lid_cfg)
                .map_err(|e| PipelineError::new(Stage::Lid, e).at(p.display()))?;
            (m, "trained")
        }
        _ => {
            return Err(PipelineError::new(
                Stage::Config,
                "[lid] needs exactly one of `model` and `train`",
            ))
        }
    };

    let wants = |s| config.audit.stages.contains(&s);
    let baselines = match [AuditStage::Correlate, AuditStage::Represent]
        .into_iter()
        .find(|&s| wants(s))
    {
        None => None,
        Some(stage) => {
            let p = config.audit.baselines.as_ref().ok_or_else(|| {
                PipelineError::new(
                    stage.into(),
                    "no baselines file configured ([audit] baselines)",
                )
            })?;
            let i = read_input(stage.into(), "baselines", base, p, inputs)?;
            Some(
                tables::read_baselines(i.bytes.as_slice(), &origin(&i))
                    .map_err(|e| PipelineError::new(stage.into(), e))?,
            )
        }
    };
    let census = if wants(AuditStage::Inventory) {
        let p = config.audit.census.as_ref().ok_or_else(|| {
            PipelineError::new(
                Stage::Inventory,
                "no census file configured ([audit] census)",
            )
        })?;
        let i = read_input(Stage::Inventory, "census", base, p, inputs)?;
        let rows = tables::read_census(i.bytes.as_slice(), &origin(&i))
            .map_err(|e| PipelineError::new(Stage::Inventory, e))?;
        Some(CensusTable::new(&rows).map_err(|e| PipelineError::new(Stage::Inventory, e))?)
    } else {
        None
    };

    Ok(Loaded {
        corpus,
        model,
        model_origin,
        geo: Geolocator { tld, cities },
        baselines,
        census,
    })
}

/// Collects output files, written under one directory.
struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), PipelineError> {
        fs::write(self.dir.join(name), bytes)
            .map_err(|e| PipelineError::new(Stage::Report, e).at(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn csv(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), PipelineError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::new(Stage::Report, e).at(name))?;
        self.write(name, buf)
    }
}

fn words_f64(counts: &CountryLanguageCounts) -> BTreeMap<CountryCode, f64> {
    counts
        .words_by_country()
        .into_iter()
        .map(|(c, w)| (c, w as f64))
        .collect()
}

/// Runs the whole pipeline. `base` anchors relative paths in `config`.
/// Outputs and `manifest.json` go to the configured output directory; on
/// failure nothing is written there by this function (see
/// [`write_error_report`]).
pub fn run(config: &PipelineConfig, base: &Path) -> Result<Manifest, PipelineError> {
    let threads = worker_threads(config.run.threads)?;
    let pool = thread_pool(threads)?;
    let options = config.report.options();
    if options.top_k == 0 {
        return Err(PipelineError::new(
            Stage::Config,
            "[report] top_k must be at least 1",
        ));
    }
    let threshold = config
        .aggregate
        .threshold()
        .map_err(|e| PipelineError::new(Stage::Config, e))?;

    let mut inputs = BTreeMap::new();
    let loaded = pool.install(|| load(config, base, &mut inputs))?;
    let model = &loaded.model;

    let min_chars = MIN_TEXT_CHARS.max(model.config().min_chars as usize);
    let ingested = pool
        .install(|| corpus::ingest(loaded.corpus.bytes.as_slice(), &loaded.geo, min_chars))
        .map_err(|e| {
            let stage = match e {
                IngestFailure::NoCityTable { .. } => Stage::Geolocate,
                IngestFailure::Io(_) => Stage::Ingest,
            };
            PipelineError::new(stage, e).at(config.input.corpus.display())
        })?;

    let counts: SourceCounts = pool
        .install(|| label_and_count(&ingested.docs, model))
        .map_err(|e| PipelineError::new(Stage::Lid, &e).at(&e.id))?;
    let table = counts
        .all
        .global_table(threshold)
        .map_err(|e| PipelineError::new(Stage::Aggregate, e))?;

    let out_dir = resolve(base, &config.report.output_dir);
    fs::create_dir_all(&out_dir)
        .map_err(|e| PipelineError::new(Stage::Report, e).at(out_dir.display()))?;
    let mut out = Outputs {
        dir: &out_dir,
        written: Vec::new(),
    };
    let has = |f| options.formats.contains(&f);

    if loaded.model_origin == "trained" && config.lid.save_model {
        let mut buf = Vec::new();
        model_file::write_model(model, &mut buf)
            .map_err(|e| PipelineError::new(Stage::Report, e))?;
        out.write("model.glid", buf)?;
    }

    if has(Format::Csv) {
        for (name, c) in [
            ("counts.csv", &counts.all),
            ("counts_web.csv", &counts.web),
            ("counts_twitter.csv", &counts.twitter),
        ] {
            out.csv(name, |b| write_counts_csv(c, b))?;
        }
        out.csv("languages.csv", |b| report::write_languages_csv(&table, b))?;
    }
    if has(Format::Json) {
        let sidecar = CountsSidecar::new(&counts.all, model);
        out.write(
            "counts.json",
            serde_json::to_string_pretty(&sidecar).expect("plain data") + "\n",
        )?;
        out.write(
            "languages.json",
            report::languages_json(&table, options.top_k),
        )?;
    }
    if has(Format::Svg) && !table.rows.is_empty() {
        let svg = report::distribution_svg(&table, options.top_k, options.svg_cap)
            .map_err(|e| PipelineError::new(Stage::Report, e).at("languages.svg"))?;
        out.write("languages.svg", svg)?;
    }

    let stages = &config.audit.stages;
    if stages.contains(&AuditStage::Correlate) {
        let baselines = loaded.baselines.as_deref().expect("loaded");
        let vars = metrics::standard_variables(
            &counts.web.words_by_country(),
            &counts.twitter.words_by_country(),
            baselines,
        )
        .map_err(|e| PipelineError::new(Stage::Correlate, e))?;
        let m = correlation_matrix(&vars).map_err(|e| PipelineError::new(Stage::Correlate, e))?;
        if has(Format::Json) {
            out.write("correlation.json", report::correlation_json(&m))?;
        }
    }

    if stages.contains(&AuditStage::Represent) {
        let baselines = loaded.baselines.as_deref().expect("loaded");
        let sources = [("web", &counts.web), ("twitter", &counts.twitter)];
        if sources.iter().all(|(_, c)| c.total_words() == 0) {
            return Err(PipelineError::new(
                Stage::Represent,
                metrics::MetricsError::EmptyCorpus,
            ));
        }
        for (source, c) in sources.into_iter().filter(|(_, c)| c.total_words() > 0) {
            let corpus = words_f64(c);
            for mode in WeightingMode::ALL {
                let pops = weight_population(baselines, mode)
                    .map_err(|e| PipelineError::new(Stage::Represent, e))?;
                let scores = representation_scores(&corpus, &pops).map_err(|e| {
                    PipelineError::new(Stage::Represent, e).at(format!("{source}/{mode}"))
                })?;
                let stem = format!("scores_{source}_{mode}");
                if has(Format::Csv) {
                    out.csv(&format!("{stem}.csv"), |b| {
                        report::write_scores_csv(&scores, b)
                    })?;
                }
                if has(Format::Geojson) {
                    let values = scores.iter().map(|s| (s.country, s.score)).collect();
                    let gj = report::choropleth(&values)
                        .map_err(|e| PipelineError::new(Stage::Report, e))?;
                    out.write(&format!("{stem}.geojson"), gj)?;
                }
            }
        }
    }

    if stages.contains(&AuditStage::Inventory) {
        let census = loaded.census.as_ref().expect("loaded");
        let inv = inventory_eval(
            &counts.all.all_country_shares(),
            census,
            config.audit.inventory_threshold,
        )
        .map_err(|e| PipelineError::new(Stage::Inventory, e))?;
        if has(Format::Csv) {
            out.csv("inventory.csv", |b| report::write_inventory_csv(&inv, b))?;
        }
        if has(Format::Geojson) {
            let tpr: BTreeMap<_, _> = inv
                .results
                .iter()
                .filter_map(|r| r.tpr.map(|t| (r.country, t)))
                .collect();
            let fp: BTreeMap<_, _> = inv
                .results
                .iter()
                .map(|r| (r.country, r.fp_count as f64))
                .collect();
            for (name, values) in [("inventory_tpr.geojson", tpr), ("inventory_fp.geojson", fp)] {
                if !values.is_empty() {
                    out.write(
                        name,
                        report::choropleth(&values)
                            .map_err(|e| PipelineError::new(Stage::Report, e))?,
                    )?;
                }
            }
        }
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: config.clone(),
        inputs,
        model: ModelSummary {
            origin: loaded.model_origin.to_string(),
            labels: model.labels().iter().map(|l| l.to_string()).collect(),
            feature_dim: model.config().feature_dim,
            hidden_dim: model.config().hidden_dim,
            min_chars: model.config().min_chars,
        },
        counts: ingested.counts,
        words_total: counts.all.total_words(),
        malformed: ingested.malformed,
        outputs: out.written.clone(),
    };
    debug_assert!(manifest.counts.is_balanced());
    let text = serde_json::to_string_pretty(&manifest).expect("plain data") + "\n";
    fs::write(out_dir.join(MANIFEST_FILE), text)
        .map_err(|e| PipelineError::new(Stage::Report, e).at(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Best-effort write of `error.json` into the output directory.
pub fn write_error_report(
    config: &PipelineConfig,
    base: &Path,
    err: &PipelineError,
) -> std::io::Result<()> {
    let dir = resolve(base, &config.report.output_dir);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(ERROR_FILE), err.to_json())
}
