//! Regenerates `tests/fixtures/e2e`: a 1000-record raw corpus with known
//! fates, the tables the pipeline needs, and `truth.json` holding the
//! expected outcome of every record.
//!
//! cargo run -p geocorpus --example make_fixture [-- OUT_DIR]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use geocorpus_core::synthetic::SyntheticLanguage;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEED: u64 = 20190601;
const N_EMITTED: usize = 820;
const N_SAME_TEXT_OTHER_MONTH: usize = 10;
const N_SHORT: usize = 50;
const N_UNGEOLOCATED: usize = 30;
const N_DUPLICATES: usize = 100;

struct Country {
    iso3: &'static str,
    tld: &'static str,
    cities: [(&'static str, f64, f64); 2],
    /// Weights over lga..lge.
    mix: [f64; 5],
    population: f64,
    gdp_per_capita: f64,
    internet_fraction: f64,
}

#[rustfmt::skip]
const COUNTRIES: [Country; 10] = [
    Country { iso3: "NZL", tld: "nz", cities: [("Wellington", -41.2865, 174.7762), ("Auckland", -36.8485, 174.7633)], mix: [0.85, 0.15, 0.0, 0.0, 0.0], population: 5.1e6, gdp_per_capita: 48000.0, internet_fraction: 0.92 },
    Country { iso3: "CAN", tld: "ca", cities: [("Ottawa", 45.4215, -75.6972), ("Toronto", 43.6532, -79.3832)], mix: [0.6, 0.4, 0.0, 0.0, 0.0], population: 38.9e6, gdp_per_capita: 52000.0, internet_fraction: 0.93 },
    Country { iso3: "FRA", tld: "fr", cities: [("Paris", 48.8566, 2.3522), ("Lyon", 45.7640, 4.8357)], mix: [0.1, 0.9, 0.0, 0.0, 0.0], population: 68.0e6, gdp_per_capita: 44000.0, internet_fraction: 0.86 },
    Country { iso3: "DEU", tld: "de", cities: [("Berlin", 52.5200, 13.4050), ("Munich", 48.1351, 11.5820)], mix: [0.05, 0.0, 0.95, 0.0, 0.0], population: 84.0e6, gdp_per_capita: 51000.0, internet_fraction: 0.91 },
    Country { iso3: "IND", tld: "in", cities: [("Delhi", 28.6139, 77.2090), ("Mumbai", 19.0760, 72.8777)], mix: [0.5, 0.0, 0.0, 0.3, 0.2], population: 1.42e9, gdp_per_capita: 2400.0, internet_fraction: 0.46 },
    Country { iso3: "BRA", tld: "br", cities: [("Sao Paulo", -23.5505, -46.6333), ("Brasilia", -15.7939, -47.8828)], mix: [0.0, 0.2, 0.0, 0.8, 0.0], population: 216.0e6, gdp_per_capita: 9000.0, internet_fraction: 0.81 },
    Country { iso3: "JPN", tld: "jp", cities: [("Tokyo", 35.6762, 139.6503), ("Osaka", 34.6937, 135.5023)], mix: [0.0, 0.0, 0.0, 0.0, 1.0], population: 125.0e6, gdp_per_capita: 34000.0, internet_fraction: 0.83 },
    Country { iso3: "KEN", tld: "ke", cities: [("Nairobi", -1.2921, 36.8219), ("Mombasa", -4.0435, 39.6682)], mix: [0.4, 0.0, 0.3, 0.0, 0.3], population: 55.0e6, gdp_per_capita: 2100.0, internet_fraction: 0.29 },
    Country { iso3: "EST", tld: "ee", cities: [("Tallinn", 59.4370, 24.7536), ("Tartu", 58.3780, 26.7290)], mix: [0.0, 0.3, 0.0, 0.7, 0.0], population: 1.37e6, gdp_per_capita: 28000.0, internet_fraction: 0.91 },
    Country { iso3: "ARG", tld: "ar", cities: [("Buenos Aires", -34.6037, -58.3816), ("Cordoba", -31.4201, -64.1888)], mix: [0.3, 0.3, 0.2, 0.0, 0.2], population: 46.0e6, gdp_per_capita: 13000.0, internet_fraction: 0.88 },
];

/// Countries with baselines but no corpus documents.
const BASELINE_ONLY: [(&str, f64, f64, f64); 2] = [
    ("USA", 333.0e6, 76000.0, 0.92),
    ("CHN", 1.41e9, 12700.0, 0.73),
];

/// Census language shares; BRA is deliberately missing.
const CENSUS: [(&str, &[(&str, f64)]); 9] = [
    ("NZL", &[("lga", 0.9), ("lgb", 0.04), ("lgc", 0.01)]),
    ("CAN", &[("lga", 0.56), ("lgb", 0.21), ("lgd", 0.02)]),
    ("FRA", &[("lgb", 0.88), ("lga", 0.06)]),
    ("DEU", &[("lgc", 0.9), ("lga", 0.03), ("lgd", 0.08)]),
    ("IND", &[("lga", 0.1), ("lgd", 0.44), ("lge", 0.08)]),
    ("JPN", &[("lge", 0.99)]),
    ("KEN", &[("lga", 0.4), ("lgc", 0.22), ("lge", 0.13)]),
    ("EST", &[("lgd", 0.68), ("lgb", 0.3)]),
    ("ARG", &[("lgb", 0.9), ("lga", 0.04)]),
];

#[derive(Clone)]
enum Body {
    /// Paragraphs of words.
    Web {
        host: String,
        paragraphs: Vec<Vec<String>>,
    },
    Tweet {
        lat: f64,
        lon: f64,
        words: Vec<String>,
    },
}

#[derive(Clone)]
struct Doc {
    body: Body,
    month: u32,
    fate: &'static str,
    country: Option<&'static str>,
    lang: Option<&'static str>,
}

impl Doc {
    fn n_words(&self) -> usize {
        match &self.body {
            Body::Web { paragraphs, .. } => paragraphs.iter().map(Vec::len).sum(),
            Body::Tweet { words, .. } => words.len(),
        }
    }

    /// Length in code points of the text once markup and noise are gone.
    fn clean_chars(&self) -> usize {
        let words: Vec<&String> = match &self.body {
            Body::Web { paragraphs, .. } => paragraphs.iter().flatten().collect(),
            Body::Tweet { words, .. } => words.iter().collect(),
        };
        words.iter().map(|w| w.chars().count()).sum::<usize>() + words.len().saturating_sub(1)
    }
}

fn pick_lang(rng: &mut ChaCha8Rng, mix: &[f64; 5]) -> usize {
    let mut x = rng.gen::<f64>() * mix.iter().sum::<f64>();
    for (i, w) in mix.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    mix.iter().rposition(|w| *w > 0.0).unwrap()
}

fn words(rng: &mut ChaCha8Rng, lang: &SyntheticLanguage, n: usize) -> Vec<String> {
    (0..n).map(|_| lang.word(rng)).collect()
}

fn split_paragraphs(rng: &mut ChaCha8Rng, w: Vec<String>) -> Vec<Vec<String>> {
    let n_par = rng.gen_range(1..=3).min(w.len());
    let mut cuts: Vec<usize> = (1..w.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(n_par - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain([w.len()]) {
        out.push(w[start..c].to_vec());
        start = c;
    }
    out
}

fn jitter(rng: &mut ChaCha8Rng, (_, lat, lon): (&str, f64, f64)) -> (f64, f64) {
    (
        lat + rng.gen_range(-0.15..0.15),
        lon + rng.gen_range(-0.15..0.15),
    )
}

/// A document of `n_words` words; regenerated until its cleaned length is
/// on the wanted side of the length filter.
#[allow(clippy::too_many_arguments)]
fn make_doc(
    rng: &mut ChaCha8Rng,
    langs: &[SyntheticLanguage],
    country: &Country,
    lang: usize,
    web: bool,
    n_words: std::ops::RangeInclusive<usize>,
    long: bool,
    fate: &'static str,
) -> Doc {
    loop {
        let n = rng.gen_range(n_words.clone());
        let w = words(rng, &langs[lang], n);
        let body = if web {
            let host = format!("site{}.{}", rng.gen_range(0..12), country.tld);
            Body::Web {
                host,
                paragraphs: split_paragraphs(rng, w),
            }
        } else {
            let city = country.cities[rng.gen_range(0..2)];
            let (lat, lon) = jitter(rng, city);
            Body::Tweet { lat, lon, words: w }
        };
        let doc = Doc {
            body,
            month: rng.gen_range(1..=6),
            fate,
            country: Some(country.iso3),
            lang: Some(["lga", "lgb", "lgc", "lgd", "lge"][lang]),
        };
        let chars = doc.clean_chars();
        if (long && chars >= 60) || (!long && chars < 45) {
            return doc;
        }
    }
}

fn render_html(rng: &mut ChaCha8Rng, paragraphs: &[Vec<String>]) -> String {
    let mut html = String::from("<!DOCTYPE html><html><head><title>Home page</title>");
    let _ = write!(
        html,
        "<script>var visits = {};</script>",
        rng.gen_range(0..1000)
    );
    html.push_str("<style>p { margin: 0 }</style></head><body>");
    html.push_str("<nav><a href=\"/\">home</a> | <a href=\"/about\">about us</a></nav>\n");
    for p in paragraphs {
        html.push_str("<div class=\"content\"><p>");
        let bold = if p.len() >= 3 {
            Some(rng.gen_range(0..p.len()))
        } else {
            None
        };
        for (i, w) in p.iter().enumerate() {
            if i > 0 {
                html.push(if rng.gen_bool(0.1) { '\n' } else { ' ' });
            }
            if Some(i) == bold {
                let _ = write!(html, "<b>{w}</b>");
            } else {
                html.push_str(w);
            }
        }
        html.push_str("</p></div>\n");
    }
    html.push_str("<footer>copyright all rights reserved</footer></body></html>");
    html
}

fn render_tweet(rng: &mut ChaCha8Rng, words: &[String]) -> String {
    let mut t = format!("@user{} ", rng.gen_range(0..500));
    let tag = rng.gen_range(0..words.len());
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            t.push(' ');
        }
        if i == tag {
            t.push('#');
        }
        t.push_str(w);
    }
    let _ = write!(t, " https://t.co/x{:06}", rng.gen_range(0..1_000_000));
    t
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e"));
    fs::create_dir_all(&out).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let langs = SyntheticLanguage::builtin();

    let mut docs: Vec<Doc> = Vec::new();
    for i in 0..N_EMITTED - N_SAME_TEXT_OTHER_MONTH {
        let c = &COUNTRIES[i % COUNTRIES.len()];
        let lang = pick_lang(&mut rng, &c.mix);
        let web = rng.gen_bool(0.6);
        docs.push(make_doc(
            &mut rng,
            &langs,
            c,
            lang,
            web,
            10..=60,
            true,
            "emitted",
        ));
    }
    // Same site, text and country as an earlier document but another month:
    // not duplicates.
    for _ in 0..N_SAME_TEXT_OTHER_MONTH {
        let mut d = docs[rng.gen_range(0..docs.len())].clone();
        d.month = d.month % 6 + 1;
        docs.push(d);
    }
    for i in 0..N_SHORT {
        let c = &COUNTRIES[i % COUNTRIES.len()];
        let lang = pick_lang(&mut rng, &c.mix);
        docs.push(make_doc(
            &mut rng,
            &langs,
            c,
            lang,
            i % 2 == 0,
            2..=6,
            false,
            "short",
        ));
    }
    for i in 0..N_UNGEOLOCATED {
        let c = &COUNTRIES[i % COUNTRIES.len()];
        let lang = pick_lang(&mut rng, &c.mix);
        let mut d = make_doc(
            &mut rng,
            &langs,
            c,
            lang,
            true,
            10..=40,
            true,
            "ungeolocated",
        );
        d.country = None;
        match &mut d.body {
            Body::Web { host, .. } => {
                let tld = ["com", "org", "net", "io", "tv"][i % 5];
                *host = format!("portal{i}.{tld}");
            }
            Body::Tweet { .. } => unreachable!(),
        }
        docs.push(d);
    }

    // Order: originals shuffled, each duplicate placed somewhere after the
    // document it copies.
    let mut keyed: Vec<(f64, Doc)> = Vec::new();
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng);
    let n = docs.len() as f64;
    for (pos, &i) in order.iter().enumerate() {
        keyed.push((pos as f64, docs[i].clone()));
    }
    let emitted: Vec<usize> = (0..keyed.len())
        .filter(|&k| keyed[k].1.fate == "emitted")
        .collect();
    for _ in 0..N_DUPLICATES {
        let k = emitted[rng.gen_range(0..emitted.len())];
        let (pos, orig) = keyed[k].clone();
        let mut d = orig;
        d.fate = "duplicate";
        if let Body::Tweet { lat, lon, .. } = &mut d.body {
            // Same nearest city, slightly different point.
            *lat += rng.gen_range(-0.01..0.01);
            *lon += rng.gen_range(-0.01..0.01);
        }
        let after = rng.gen_range(pos + 0.5..n);
        keyed.push((after, d));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut corpus = String::new();
    let mut truth_docs = Vec::new();
    let mut expected: BTreeMap<&str, usize> = BTreeMap::new();
    for (idx, (_, d)) in keyed.iter().enumerate() {
        let id = format!("d{idx:04}");
        let ts = format!(
            "2019-{:02}-{:02}T{:02}:00:00Z",
            d.month,
            rng.gen_range(1..=28),
            rng.gen_range(0..24)
        );
        let rec = match &d.body {
            Body::Web { host, paragraphs } => json!({
                "id": id, "source": "web",
                "url": format!("https://{host}/page/{}", rng.gen_range(0..10_000)),
                "html": render_html(&mut rng, paragraphs), "ts": ts,
            }),
            Body::Tweet { lat, lon, words } => json!({
                "id": id, "source": "twitter", "text": render_tweet(&mut rng, words),
                "lat": lat, "lon": lon, "ts": ts,
            }),
        };
        corpus.push_str(&serde_json::to_string(&rec).unwrap());
        corpus.push('\n');
        *expected.entry(d.fate).or_default() += 1;
        truth_docs.push(json!({
            "id": id,
            "source": if matches!(d.body, Body::Web { .. }) { "web" } else { "twitter" },
            "fate": d.fate, "country": d.country, "lang": d.lang, "words": d.n_words(),
        }));
    }
    assert_eq!(expected["emitted"], N_EMITTED);
    let truth = json!({
        "docs_in": keyed.len(),
        "docs_malformed": 0,
        "docs_dropped_short": expected["short"],
        "docs_dropped_ungeolocated": expected["ungeolocated"],
        "docs_dropped_dedup": expected["duplicate"],
        "docs_emitted": expected["emitted"],
        "docs": truth_docs,
    });
    fs::write(out.join("corpus.jsonl"), corpus).unwrap();
    fs::write(
        out.join("truth.json"),
        serde_json::to_string_pretty(&truth).unwrap() + "\n",
    )
    .unwrap();

    let mut cities = String::from("name,iso3,lat,lon\n");
    for c in &COUNTRIES {
        for (name, lat, lon) in c.cities {
            let _ = writeln!(cities, "{name},{},{lat},{lon}", c.iso3);
        }
    }
    fs::write(out.join("cities.csv"), cities).unwrap();

    let mut baselines = String::from("iso3,population,gdp_per_capita,internet_fraction\n");
    for c in &COUNTRIES {
        let _ = writeln!(
            baselines,
            "{},{},{},{}",
            c.iso3, c.population, c.gdp_per_capita, c.internet_fraction
        );
    }
    for (iso3, p, g, f) in BASELINE_ONLY {
        let _ = writeln!(baselines, "{iso3},{p},{g},{f}");
    }
    fs::write(out.join("baselines.csv"), baselines).unwrap();

    let mut census = String::from("iso3,lang,share\n");
    for (iso3, rows) in CENSUS {
        for (lang, share) in rows {
            let _ = writeln!(census, "{iso3},{lang},{share}");
        }
    }
    fs::write(out.join("census.csv"), census).unwrap();

    let mut train = String::new();
    let mut train_rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    for _ in 0..2000 {
        for l in &langs {
            let _ = writeln!(train, "{}\t{}", l.label(), l.sample(&mut train_rng, 50));
        }
    }
    fs::write(out.join("train.tsv"), train).unwrap();

    fs::write(
        out.join("pipeline.toml"),
        "[input]\ncorpus = \"corpus.jsonl\"\n\n\
         [lid]\ntrain = \"train.tsv\"\nfeature_dim = 4096\nhidden_dim = 32\nepochs = 5\n\n\
         [geo]\ncities = \"cities.csv\"\n\n\
         [aggregate]\nmin_words = 1\n\n\
         [audit]\nbaselines = \"baselines.csv\"\ncensus = \"census.csv\"\n\n\
         [report]\noutput_dir = \"out\"\ntop_k = 5\nsvg_cap = 0.5\n",
    )
    .unwrap();
    println!("wrote {}", out.display());
}
