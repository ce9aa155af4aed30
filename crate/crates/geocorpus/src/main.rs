use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use geocorpus::config::PipelineConfig;
use geocorpus::corpus::{self, Geolocator};
use geocorpus::counts::{self, CountsSidecar};
use geocorpus::model_file;
use geocorpus::pipeline::{self, PipelineError};
use geocorpus::report::{self, Format};
use geocorpus::tables;
use geocorpus_core::aggregate::{LanguageThreshold, DEFAULT_MIN_WORDS};
use geocorpus_core::baselines::{
    weight_population, CensusTable, WeightingMode, DEFAULT_INVENTORY_THRESHOLD,
};
use geocorpus_core::geo::{CityIndex, DEFAULT_RADIUS_KM};
use geocorpus_core::ingest::MIN_TEXT_CHARS;
use geocorpus_core::metrics;
use geocorpus_core::{lid, CountryLanguageCounts, ModelConfig};

#[derive(Parser)]
#[command(
    name = "geocorpus",
    version,
    about = "Build geolocated corpora and audit them against population baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a language identifier from `label<TAB>text` lines.
    LidTrain(LidTrainArgs),
    /// Score a model on labelled text.
    LidEval(LidEvalArgs),
    /// Clean, filter, geolocate and deduplicate a raw JSON-lines corpus.
    Ingest(IngestArgs),
    /// Label cleaned documents and count words per country and language.
    Aggregate(AggregateArgs),
    /// Correlate per-country corpus size with weighted population.
    AuditCorrelate(CorrelateArgs),
    /// Corpus share minus population share for each country.
    AuditRepresent(RepresentArgs),
    /// Compare corpus language inventories with census languages.
    AuditInventory(InventoryArgs),
    /// Language distribution table and bar chart from a counts file.
    Report(ReportArgs),
    /// Run the whole pipeline from a config file.
    Run(RunArgs),
}

#[derive(Args)]
struct LidTrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    feature_dim: Option<u32>,
    #[arg(long)]
    hidden_dim: Option<u32>,
    #[arg(long)]
    min_chars: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<u32>,
}

#[derive(Args)]
struct LidEvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// `name,iso3,lat,lon`; required when the input has tweets.
    #[arg(long)]
    cities: Option<PathBuf>,
    /// `tld,iso3`; defaults to the built-in ccTLD table.
    #[arg(long)]
    tld: Option<PathBuf>,
    /// Extra TLDs to ignore, one per line.
    #[arg(long)]
    excluded: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RADIUS_KM)]
    radius_km: f64,
    #[arg(long, default_value_t = MIN_TEXT_CHARS)]
    min_chars: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AggregateArgs {
    /// Cleaned JSON-lines from `ingest`.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long)]
    web: PathBuf,
    #[arg(long)]
    twitter: PathBuf,
    #[arg(long)]
    baselines: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct RepresentArgs {
    #[arg(long)]
    counts: PathBuf,
    #[arg(long)]
    baselines: PathBuf,
    /// raw, internet or gdp.
    #[arg(long, default_value = "raw")]
    weighting: WeightingMode,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    geojson: Option<PathBuf>,
}

#[derive(Args)]
struct InventoryArgs {
    #[arg(long)]
    counts: PathBuf,
    #[arg(long)]
    census: PathBuf,
    #[arg(long, default_value_t = DEFAULT_INVENTORY_THRESHOLD)]
    threshold: f64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    counts: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    formats: Vec<Format>,
    #[arg(long, default_value_t = report::DEFAULT_TOP_K)]
    top_k: usize,
    /// Share at which bars are clipped.
    #[arg(long, default_value_t = report::DEFAULT_SVG_CAP)]
    cap: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_WORDS, conflicts_with = "country_share")]
    min_words: u64,
    #[arg(long)]
    country_share: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; relative paths inside resolve against its directory.
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `[report] output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads; GEOCORPUS_THREADS takes precedence.
    #[arg(long)]
    threads: Option<usize>,
    /// Languages shown in the chart and JSON table.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    inventory_threshold: Option<f64>,
    /// Replaces the global-table language threshold with a word minimum.
    #[arg(long)]
    min_words: Option<u64>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_model(path: &Path) -> Result<geocorpus_core::LidModel> {
    model_file::load_model(path).with_context(|| format!("loading model {}", path.display()))
}

fn lid_train(a: LidTrainArgs) -> Result<()> {
    let d = ModelConfig::default();
    let cfg = ModelConfig {
        feature_dim: a.feature_dim.unwrap_or(d.feature_dim),
        hidden_dim: a.hidden_dim.unwrap_or(d.hidden_dim),
        min_chars: a.min_chars.unwrap_or(d.min_chars),
        seed: a.seed.unwrap_or(d.seed),
        epochs: a.epochs.unwrap_or(d.epochs),
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
    };
    let samples = tables::load_labelled_text(&a.train)?;
    let model = lid::train(&samples, &cfg)?;
    model_file::save_model(&model, &a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!(
        "trained on {} samples, {} labels -> {}",
        samples.len(),
        model.labels().len(),
        a.out.display()
    );
    Ok(())
}

fn lid_eval(a: LidEvalArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let test = tables::load_labelled_text(&a.test)?;
    let r = model.evaluate(&test)?;
    let mut out = io::stdout().lock();
    writeln!(out, "label\tprecision\trecall\tf1\tsupport")?;
    for (l, m) in &r.per_label {
        writeln!(
            out,
            "{l}\t{:.4}\t{:.4}\t{:.4}\t{}",
            m.precision, m.recall, m.f1, m.support
        )?;
    }
    writeln!(out, "macro_f1\t{:.4}\tn={}", r.macro_f1, r.n_samples)?;
    if let Some(p) = a.json {
        let per_label: BTreeMap<String, serde_json::Value> = r
            .per_label
            .iter()
            .map(|(l, m)| {
                (
                    l.to_string(),
                    serde_json::json!({"precision": m.precision, "recall": m.recall, "f1": m.f1, "support": m.support}),
                )
            })
            .collect();
        let doc = serde_json::json!({"per_label": per_label, "macro_f1": r.macro_f1, "n_samples": r.n_samples});
        fs::write(&p, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let cities = match &a.cities {
        Some(p) => Some(CityIndex::new(tables::load_cities(p)?, a.radius_km)?),
        None => None,
    };
    let geo = Geolocator {
        tld: tables::load_tld_table(a.tld.as_deref(), a.excluded.as_deref())?,
        cities,
    };
    let pool = pipeline::thread_pool(pipeline::worker_threads(a.threads)?)?;
    let input = BufReader::new(
        File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?,
    );
    let out = pool.install(|| corpus::ingest(input, &geo, a.min_chars))?;
    corpus::write_clean(&out.docs, create(&a.out)?)?;
    for m in &out.malformed {
        eprintln!("line {}: skipped: {}", m.line, m.reason);
    }
    println!("{}", serde_json::to_string_pretty(&out.counts)?);
    Ok(())
}

fn aggregate(a: AggregateArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let input = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let docs = corpus::read_clean(BufReader::new(input))
        .with_context(|| format!("reading {}", a.input.display()))?;
    let pool = pipeline::thread_pool(pipeline::worker_threads(a.threads)?)?;
    let counts = pool.install(|| counts::label_and_count(&docs, &model))?;
    fs::create_dir_all(&a.out_dir)?;
    for (name, c) in [
        ("counts.csv", &counts.all),
        ("counts_web.csv", &counts.web),
        ("counts_twitter.csv", &counts.twitter),
    ] {
        counts::write_counts_csv(c, create(&a.out_dir.join(name))?)?;
    }
    let sidecar = CountsSidecar::new(&counts.all, &model);
    fs::write(
        a.out_dir.join("counts.json"),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    println!(
        "{} documents, {} words",
        counts.all.n_docs(),
        counts.all.total_words()
    );
    Ok(())
}

fn read_counts(path: &Path) -> Result<CountryLanguageCounts> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    counts::read_counts_csv(f).with_context(|| format!("reading {}", path.display()))
}

fn audit_correlate(a: CorrelateArgs) -> Result<()> {
    let web = read_counts(&a.web)?;
    let twitter = read_counts(&a.twitter)?;
    let baselines = tables::load_baselines(&a.baselines)?;
    let vars = metrics::standard_variables(
        &web.words_by_country(),
        &twitter.words_by_country(),
        &baselines,
    )?;
    let m = metrics::correlation_matrix(&vars)?;
    fs::write(&a.out, report::correlation_json(&m))?;
    for (name, missing) in &m.missing {
        if !missing.is_empty() {
            eprintln!(
                "{name}: {} countries missing, left out of its pairs",
                missing.len()
            );
        }
    }
    Ok(())
}

fn audit_represent(a: RepresentArgs) -> Result<()> {
    let corpus: BTreeMap<_, _> = read_counts(&a.counts)?
        .words_by_country()
        .into_iter()
        .map(|(c, w)| (c, w as f64))
        .collect();
    let pops = weight_population(&tables::load_baselines(&a.baselines)?, a.weighting)?;
    let scores = metrics::representation_scores(&corpus, &pops)?;
    report::write_scores_csv(&scores, create(&a.out)?)?;
    if let Some(p) = a.geojson {
        let values = scores.iter().map(|s| (s.country, s.score)).collect();
        report::emit_choropleth(&values, create(&p)?)?;
    }
    Ok(())
}

fn audit_inventory(a: InventoryArgs) -> Result<()> {
    let shares = read_counts(&a.counts)?.all_country_shares();
    let census = CensusTable::new(&tables::load_census(&a.census)?)?;
    let r = metrics::inventory_eval(&shares, &census, a.threshold)?;
    report::write_inventory_csv(&r, create(&a.out)?)?;
    if !r.no_census.is_empty() {
        let list: Vec<_> = r.no_census.iter().map(|c| c.as_str()).collect();
        eprintln!("no census data, left out: {}", list.join(" "));
    }
    let empty: Vec<_> = r.empty_truth().map(|c| c.to_string()).collect();
    if !empty.is_empty() {
        eprintln!("no census language above threshold: {}", empty.join(" "));
    }
    Ok(())
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    let counts = read_counts(&a.counts)?;
    let threshold = match a.country_share {
        Some(f) => LanguageThreshold::CountryShare(f),
        None => LanguageThreshold::MinWords(a.min_words),
    };
    let table = counts.global_table(threshold)?;
    fs::create_dir_all(&a.out_dir)?;
    if a.formats.contains(&Format::Csv) {
        report::write_languages_csv(&table, create(&a.out_dir.join("languages.csv"))?)?;
    }
    if a.formats.contains(&Format::Json) {
        fs::write(
            a.out_dir.join("languages.json"),
            report::languages_json(&table, a.top_k),
        )?;
    }
    if a.formats.contains(&Format::Svg) {
        let options = report::ReportOptions {
            formats: a.formats.iter().copied().collect(),
            top_k: a.top_k,
            svg_cap: a.cap,
        };
        report::emit_distribution_svg(&table, &options, create(&a.out_dir.join("languages.svg"))?)?;
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<ExitCode> {
    let base = a.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut config = match PipelineConfig::load(&a.config) {
        Ok(c) => c,
        Err(e) => {
            eprint!(
                "{}",
                PipelineError::new(pipeline::Stage::Config, e).to_json()
            );
            return Ok(ExitCode::from(2));
        }
    };
    if let Some(d) = a.output_dir {
        config.report.output_dir = std::path::absolute(d)?;
    }
    if a.threads.is_some() {
        config.run.threads = a.threads;
    }
    if let Some(k) = a.top_k {
        config.report.top_k = k;
    }
    if let Some(t) = a.inventory_threshold {
        config.audit.inventory_threshold = t;
    }
    if let Some(n) = a.min_words {
        config.aggregate.min_words = Some(n);
        config.aggregate.country_share = None;
    }
    match pipeline::run(&config, &base) {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.counts)?);
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprint!("{}", e.to_json());
            if let Err(io) = pipeline::write_error_report(&config, &base, &e) {
                eprintln!("could not write {}: {io}", pipeline::ERROR_FILE);
            }
            Ok(ExitCode::from(2))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::LidTrain(a) => lid_train(a).map(|_| ExitCode::SUCCESS),
        Command::LidEval(a) => lid_eval(a).map(|_| ExitCode::SUCCESS),
        Command::Ingest(a) => ingest(a).map(|_| ExitCode::SUCCESS),
        Command::Aggregate(a) => aggregate(a).map(|_| ExitCode::SUCCESS),
        Command::AuditCorrelate(a) => audit_correlate(a).map(|_| ExitCode::SUCCESS),
        Command::AuditRepresent(a) => audit_represent(a).map(|_| ExitCode::SUCCESS),
        Command::AuditInventory(a) => audit_inventory(a).map(|_| ExitCode::SUCCESS),
        Command::Report(a) => report_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            // Library errors often repeat their source in their own message.
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
