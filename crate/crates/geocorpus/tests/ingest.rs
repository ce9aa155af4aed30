use std::collections::BTreeSet;

use geocorpus::corpus::{ingest, Geolocator};
use geocorpus::pipeline::thread_pool;
use geocorpus_core::geo::{CityIndex, CityRecord, TldTable};
use geocorpus_core::CountryCode;
use proptest::prelude::*;

fn geolocator() -> Geolocator {
    let nzl = CountryCode::new("NZL").unwrap();
    let cities = vec![
        CityRecord::new("Wellington", nzl, -41.2865, 174.7762).unwrap(),
        CityRecord::new("Auckland", nzl, -36.8485, 174.7633).unwrap(),
    ];
    Geolocator {
        tld: TldTable::builtin(),
        cities: Some(CityIndex::new(cities, 50.0).unwrap()),
    }
}

#[derive(Debug, Clone)]
enum Line {
    Web {
        host: &'static str,
        words: usize,
        month: u8,
    },
    Tweet {
        lat: f64,
        words: usize,
        month: u8,
    },
    Garbage(String),
    Blank,
}

fn line() -> impl Strategy<Value = Line> {
    let host = prop::sample::select(vec!["a.nz", "b.nz", "c.com", "d.io", "e.fr"]);
    prop_oneof![
        4 => (host, 1..20usize, 1..3u8).prop_map(|(host, words, month)| Line::Web { host, words, month }),
        3 => (-42.0..-36.0f64, 1..20usize, 1..3u8).prop_map(|(lat, words, month)| Line::Tweet { lat, words, month }),
        1 => "[a-z{}\":, ]{0,30}".prop_filter("not blank", |s| !s.trim().is_empty()).prop_map(Line::Garbage),
        1 => Just(Line::Blank),
    ]
}

/// Few distinct word counts and months, so duplicates are common.
fn render(l: &Line, i: usize) -> String {
    let text = |n: usize| vec!["kia ora"; n].join(" ");
    match l {
        Line::Web { host, words, month } => format!(
            r#"{{"id":"w{i}","source":"web","url":"https://{host}/x","html":"<p>{}</p>","ts":"2020-{month:02}-01"}}"#,
            text(*words)
        ),
        Line::Tweet { lat, words, month } => format!(
            r#"{{"id":"t{i}","source":"twitter","text":"{}","lat":{lat},"lon":174.77,"ts":"2020-{month:02}-01"}}"#,
            text(*words)
        ),
        Line::Garbage(s) => format!("{{{s}"),
        Line::Blank => String::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_balance_and_keys_are_unique(lines in prop::collection::vec(line(), 0..120)) {
        let input: String = lines.iter().enumerate().map(|(i, l)| render(l, i) + "\n").collect();
        let geo = geolocator();
        let out = thread_pool(3).unwrap().install(|| ingest(input.as_bytes(), &geo, 50)).unwrap();
        let c = out.counts;
        prop_assert!(c.is_balanced());
        let blank = lines.iter().filter(|l| matches!(l, Line::Blank)).count() as u64;
        let garbage = lines.iter().filter(|l| matches!(l, Line::Garbage(_))).count() as u64;
        prop_assert_eq!(c.docs_in, lines.len() as u64 - blank);
        prop_assert_eq!(c.docs_malformed, garbage);
        prop_assert_eq!(out.malformed.len() as u64, garbage);
        prop_assert_eq!(c.docs_emitted, out.docs.len() as u64);

        let keys: BTreeSet<_> = out
            .docs
            .iter()
            .map(|(d, c)| (d.site.clone(), d.time_bucket.clone(), *c, d.text.clone()))
            .collect();
        prop_assert_eq!(keys.len(), out.docs.len());
        for (d, _) in &out.docs {
            prop_assert!(d.text.chars().count() >= 50);
        }

        // Input order survives, and one thread gives the same answer.
        let single = thread_pool(1).unwrap().install(|| ingest(input.as_bytes(), &geo, 50)).unwrap();
        prop_assert_eq!(&single.docs, &out.docs);
        let order: Vec<usize> = out.docs.iter().map(|(d, _)| d.id[1..].parse().unwrap()).collect();
        prop_assert!(order.windows(2).all(|w| w[0] < w[1]));
    }
}
