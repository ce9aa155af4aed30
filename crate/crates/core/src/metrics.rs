//! Audit metrics comparing corpus-derived country data with baselines.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::baselines::{weight_population, CensusTable, PopulationRecord, WeightingMode};
use crate::geo::CountryCode;
use crate::lid::LanguageLabel;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    LengthMismatch,
    TooFewPoints,
    ConstantVector,
    NonFinite,
    /// A correlation variable has the same value for every shared country.
    ConstantVariable(String),
    InsufficientOverlap {
        shared: usize,
    },
    EmptyCorpus,
    EmptyPopulation,
    InvalidThreshold,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch => f.write_str("vectors differ in length"),
            MetricsError::TooFewPoints => f.write_str("need at least 3 points"),
            MetricsError::ConstantVector => f.write_str("vector is constant"),
            MetricsError::NonFinite => f.write_str("vector contains NaN or infinity"),
            MetricsError::ConstantVariable(v) => write!(f, "variable {v} is constant"),
            MetricsError::InsufficientOverlap { shared } => {
                write!(f, "only {shared} countries shared by all inputs, need 3")
            }
            MetricsError::EmptyCorpus => f.write_str("corpus has no words"),
            MetricsError::EmptyPopulation => f.write_str("population total is zero"),
            MetricsError::InvalidThreshold => f.write_str("threshold must be in [0, 1]"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// Sample Pearson correlation, two-pass mean-centered.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch);
    }
    if x.len() < 3 {
        return Err(MetricsError::TooFewPoints);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(MetricsError::ConstantVector);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ConstantVector);
    }
    Ok((sxy / (libm::sqrt(sxx) * libm::sqrt(syy))).clamp(-1.0, 1.0))
}

/// One named per-country series.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub values: BTreeMap<CountryCode, f64>,
}

impl Variable {
    pub fn new(name: &str, values: BTreeMap<CountryCode, f64>) -> Self {
        Variable {
            name: name.to_string(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    /// Symmetric, unit diagonal.
    pub r: Vec<Vec<f64>>,
    /// Countries each pair was computed over.
    pub pair_counts: Vec<Vec<usize>>,
    /// Countries present in every variable.
    pub n_countries: usize,
    /// Per variable, the countries seen in some other variable but missing
    /// here. Pair `(i, j)` excludes `missing[i] ∪ missing[j]`.
    pub missing: BTreeMap<String, Vec<CountryCode>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        Some(self.r[i][j])
    }
}

/// Pairwise Pearson correlations, each pair over the countries both
/// variables cover.
pub fn correlation_matrix(vars: &[Variable]) -> Result<CorrelationMatrix, MetricsError> {
    let universe: BTreeSet<CountryCode> =
        vars.iter().flat_map(|v| v.values.keys().copied()).collect();
    let shared = universe
        .iter()
        .filter(|c| vars.iter().all(|v| v.values.contains_key(c)))
        .count();
    if shared < 3 {
        return Err(MetricsError::InsufficientOverlap { shared });
    }

    let k = vars.len();
    let mut r = vec![vec![1.0; k]; k];
    let mut pair_counts = vec![vec![0; k]; k];
    for i in 0..k {
        pair_counts[i][i] = vars[i].values.len();
        for j in i + 1..k {
            let (xs, ys): (Vec<f64>, Vec<f64>) = vars[i]
                .values
                .iter()
                .filter_map(|(c, &x)| vars[j].values.get(c).map(|&y| (x, y)))
                .unzip();
            let rij = pearson(&xs, &ys).map_err(|e| match e {
                MetricsError::ConstantVector => {
                    let name = if xs.iter().all(|&a| a == xs[0]) {
                        &vars[i]
                    } else {
                        &vars[j]
                    };
                    MetricsError::ConstantVariable(name.name.clone())
                }
                other => other,
            })?;
            r[i][j] = rij;
            r[j][i] = rij;
            pair_counts[i][j] = xs.len();
            pair_counts[j][i] = xs.len();
        }
    }

    let missing = vars
        .iter()
        .map(|v| {
            let m = universe
                .iter()
                .filter(|c| !v.values.contains_key(c))
                .copied()
                .collect();
            (v.name.clone(), m)
        })
        .collect();

    Ok(CorrelationMatrix {
        variables: vars.iter().map(|v| v.name.clone()).collect(),
        r,
        pair_counts,
        n_countries: shared,
        missing,
    })
}

/// Names of the five standard audit variables, in matrix order.
pub const STANDARD_VARIABLES: [&str; 5] = [
    "web_words",
    "twitter_words",
    "pop_raw",
    "pop_internet",
    "pop_gdp",
];

/// Words per country for each corpus plus the three population weightings.
/// A country is present in a corpus variable only if that corpus has words
/// for it.
pub fn standard_variables(
    web_words: &BTreeMap<CountryCode, u64>,
    twitter_words: &BTreeMap<CountryCode, u64>,
    baselines: &[PopulationRecord],
) -> Result<Vec<Variable>, MetricsError> {
    let words = |m: &BTreeMap<CountryCode, u64>| -> BTreeMap<CountryCode, f64> {
        m.iter()
            .filter(|(_, &w)| w > 0)
            .map(|(c, &w)| (*c, w as f64))
            .collect()
    };
    let pop = |mode| weight_population(baselines, mode).map_err(|_| MetricsError::EmptyPopulation);
    Ok(vec![
        Variable::new(STANDARD_VARIABLES[0], words(web_words)),
        Variable::new(STANDARD_VARIABLES[1], words(twitter_words)),
        Variable::new(STANDARD_VARIABLES[2], pop(WeightingMode::Raw)?),
        Variable::new(STANDARD_VARIABLES[3], pop(WeightingMode::Internet)?),
        Variable::new(STANDARD_VARIABLES[4], pop(WeightingMode::Gdp)?),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationScore {
    pub country: CountryCode,
    pub corpus_share: f64,
    pub pop_share: f64,
    /// `corpus_share - pop_share`; positive means over-represented.
    pub score: f64,
}

/// Normalizes both inputs to shares and subtracts. Countries missing from
/// one side get a zero share on that side.
pub fn representation_scores(
    corpus: &BTreeMap<CountryCode, f64>,
    populations: &BTreeMap<CountryCode, f64>,
) -> Result<Vec<RepresentationScore>, MetricsError> {
    let corpus_total: f64 = corpus.values().sum();
    if !(corpus_total > 0.0 && corpus_total.is_finite()) {
        return Err(MetricsError::EmptyCorpus);
    }
    let pop_total: f64 = populations.values().sum();
    if !(pop_total > 0.0 && pop_total.is_finite()) {
        return Err(MetricsError::EmptyPopulation);
    }
    let countries: BTreeSet<CountryCode> =
        corpus.keys().chain(populations.keys()).copied().collect();
    Ok(countries
        .into_iter()
        .map(|country| {
            let corpus_share = corpus.get(&country).map_or(0.0, |w| w / corpus_total);
            let pop_share = populations.get(&country).map_or(0.0, |p| p / pop_total);
            RepresentationScore {
                country,
                corpus_share,
                pop_share,
                score: corpus_share - pop_share,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InventoryResult {
    pub country: CountryCode,
    /// Census languages at or above the threshold.
    pub truth: BTreeSet<LanguageLabel>,
    /// Corpus languages at or above the threshold.
    pub predicted: BTreeSet<LanguageLabel>,
    /// `|truth ∩ predicted| / |truth|`; `None` when `truth` is empty.
    pub tpr: Option<f64>,
    pub false_positives: BTreeSet<LanguageLabel>,
    pub fp_count: usize,
}

impl InventoryResult {
    pub fn true_positives(&self) -> usize {
        self.truth.intersection(&self.predicted).count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InventoryReport {
    pub results: Vec<InventoryResult>,
    /// Countries with corpus data but no census entry, left out.
    pub no_census: Vec<CountryCode>,
    /// Census countries the corpus never saw, left out.
    pub no_corpus: Vec<CountryCode>,
}

impl InventoryReport {
    /// Countries evaluated whose census set was empty at the threshold.
    pub fn empty_truth(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.results
            .iter()
            .filter(|r| r.truth.is_empty())
            .map(|r| r.country)
    }
}

/// Compares per-country corpus language inventories with the census.
pub fn inventory_eval(
    corpus_shares: &BTreeMap<CountryCode, BTreeMap<LanguageLabel, f64>>,
    census: &CensusTable,
    threshold: f64,
) -> Result<InventoryReport, MetricsError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(MetricsError::InvalidThreshold);
    }
    let mut report = InventoryReport::default();
    for (&country, shares) in corpus_shares {
        let Ok(truth) = census.census_language_set(country, threshold) else {
            report.no_census.push(country);
            continue;
        };
        let predicted: BTreeSet<LanguageLabel> = shares
            .iter()
            .filter(|(_, &s)| s >= threshold)
            .map(|(l, _)| *l)
            .collect();
        let hits = truth.intersection(&predicted).count();
        let tpr = (!truth.is_empty()).then(|| hits as f64 / truth.len() as f64);
        let false_positives: BTreeSet<_> = predicted.difference(&truth).copied().collect();
        report.results.push(InventoryResult {
            country,
            fp_count: false_positives.len(),
            truth,
            predicted,
            tpr,
            false_positives,
        });
    }
    report.no_corpus = census
        .countries()
        .filter(|c| !corpus_shares.contains_key(c))
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(s: &str) -> CountryCode {
        s.parse().unwrap()
    }
    fn l(s: &str) -> LanguageLabel {
        s.parse().unwrap()
    }
    fn set(xs: &[&str]) -> BTreeSet<LanguageLabel> {
        xs.iter().map(|s| l(s)).collect()
    }

    /// Textbook single-pass formula, used as an independent oracle.
    fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / libm::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))
    }

    #[test]
    fn pearson_affine() {
        let x = [1.0, 2.0, 4.0, 7.0, 11.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() <= 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(MetricsError::TooFewPoints)
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch)
        );
        assert_eq!(
            pearson(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]),
            Err(MetricsError::ConstantVector)
        );
        assert_eq!(
            pearson(&[1.0, f64::NAN, 3.0], &[1.0, 2.0, 3.0]),
            Err(MetricsError::NonFinite)
        );
    }

    proptest! {
        #[test]
        fn pearson_matches_naive(pairs in proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 3..200)) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = pearson(&x, &y).unwrap();
            prop_assert!((r - naive_pearson(&x, &y)).abs() <= 1e-12);
        }

        #[test]
        fn pearson_invariances(
            pairs in proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 3..100),
            a in 0.01..100.0f64,
            b in -1000.0..1000.0f64,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = pearson(&x, &y).unwrap();
            let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&xt, &y).unwrap() - r).abs() <= 1e-9);
            let yn: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((pearson(&x, &yn).unwrap() + r).abs() <= 1e-12);
        }
    }

    fn var(name: &str, vals: &[(&str, f64)]) -> Variable {
        Variable::new(name, vals.iter().map(|(k, v)| (c(k), *v)).collect())
    }

    #[test]
    fn matrix_identical_series() {
        let pop = [("AAA", 10.0), ("BBB", 20.0), ("CCC", 5.0), ("DDD", 40.0)];
        let m = correlation_matrix(&[var("words", &pop), var("pop", &pop)]).unwrap();
        assert_eq!(m.r[0][1], 1.0);
        assert_eq!(m.r[0][0], 1.0);
        assert_eq!(m.n_countries, 4);
    }

    #[test]
    fn matrix_pairwise_drop_and_report() {
        let a = var(
            "a",
            &[("AAA", 1.0), ("BBB", 2.0), ("CCC", 3.0), ("DDD", 5.0)],
        );
        let b = var(
            "b",
            &[("AAA", 2.0), ("BBB", 1.0), ("CCC", 4.0), ("EEE", 9.0)],
        );
        let cc = var(
            "c",
            &[
                ("AAA", 1.0),
                ("BBB", 3.0),
                ("CCC", 2.0),
                ("DDD", 1.0),
                ("EEE", 0.0),
            ],
        );
        let m = correlation_matrix(&[a, b, cc]).unwrap();
        assert_eq!(m.n_countries, 3);
        assert_eq!(m.pair_counts[0][2], 4);
        assert_eq!(m.pair_counts[1][2], 4);
        assert_eq!(m.pair_counts[0][1], 3);
        assert_eq!(m.missing["a"], vec![c("EEE")]);
        assert_eq!(m.missing["b"], vec![c("DDD")]);
        assert!(m.missing["c"].is_empty());
        let expected = pearson(&[1.0, 2.0, 3.0, 5.0], &[1.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(m.get("a", "c"), Some(expected));
        assert_eq!(m.get("c", "a"), Some(expected));
    }

    #[test]
    fn matrix_errors() {
        let a = var("a", &[("AAA", 1.0), ("BBB", 2.0), ("CCC", 3.0)]);
        let b = var("b", &[("AAA", 1.0), ("BBB", 2.0), ("DDD", 3.0)]);
        assert_eq!(
            correlation_matrix(&[a.clone(), b]),
            Err(MetricsError::InsufficientOverlap { shared: 2 })
        );
        let k = var("k", &[("AAA", 7.0), ("BBB", 7.0), ("CCC", 7.0)]);
        assert_eq!(
            correlation_matrix(&[a, k]),
            Err(MetricsError::ConstantVariable("k".into()))
        );
    }

    #[test]
    fn representation_basics() {
        let corpus: BTreeMap<_, _> = [(c("AAA"), 10.0), (c("BBB"), 30.0)].into_iter().collect();
        let pop: BTreeMap<_, _> = [(c("AAA"), 1.0), (c("BBB"), 3.0)].into_iter().collect();
        let s = representation_scores(&corpus, &pop).unwrap();
        assert!(s.iter().all(|r| r.score == 0.0));

        let pop: BTreeMap<_, _> = [(c("AAA"), 1.0), (c("BBB"), 3.0), (c("CCC"), 4.0)]
            .into_iter()
            .collect();
        let s = representation_scores(&corpus, &pop).unwrap();
        let ccc = s.iter().find(|r| r.country == c("CCC")).unwrap();
        assert_eq!(ccc.corpus_share, 0.0);
        assert_eq!(ccc.score, -0.5);

        assert_eq!(
            representation_scores(&BTreeMap::new(), &pop),
            Err(MetricsError::EmptyCorpus)
        );
        assert_eq!(
            representation_scores(&corpus, &BTreeMap::new()),
            Err(MetricsError::EmptyPopulation)
        );
    }

    #[test]
    fn representation_india_web_value() {
        // Corpus share 47/10000 = 0.0047, population share 1777/10000 = 0.1777.
        let corpus: BTreeMap<_, _> = [(c("IND"), 47.0), (c("ZZZ"), 9_953.0)]
            .into_iter()
            .collect();
        let pop: BTreeMap<_, _> = [(c("IND"), 1_777.0), (c("ZZZ"), 8_223.0)]
            .into_iter()
            .collect();
        let s = representation_scores(&corpus, &pop).unwrap();
        let ind = s.iter().find(|r| r.country == c("IND")).unwrap();
        assert_eq!(ind.corpus_share, 0.0047);
        assert_eq!(ind.pop_share, 0.1777);
        assert_eq!(ind.score, -0.1730);
    }

    #[test]
    fn inventory_examples() {
        let census = CensusTable::new(&[
            crate::baselines::CensusRecord::new(c("CAN"), l("eng"), 0.6).unwrap(),
            crate::baselines::CensusRecord::new(c("CAN"), l("fra"), 0.3).unwrap(),
            crate::baselines::CensusRecord::new(c("DEU"), l("deu"), 0.95).unwrap(),
            crate::baselines::CensusRecord::new(c("BRA"), l("por"), 0.01).unwrap(),
        ])
        .unwrap();
        let shares: BTreeMap<_, BTreeMap<_, _>> = [
            (
                c("CAN"),
                [(l("eng"), 0.7), (l("fra"), 0.3)].into_iter().collect(),
            ),
            (
                c("DEU"),
                [
                    (l("deu"), 0.6),
                    (l("eng"), 0.25),
                    (l("spa"), 0.1),
                    (l("ita"), 0.05 - 1e-9),
                ]
                .into_iter()
                .collect(),
            ),
            (c("BRA"), [(l("por"), 1.0)].into_iter().collect()),
            (c("USA"), [(l("eng"), 1.0)].into_iter().collect()),
        ]
        .into_iter()
        .collect();
        let r = inventory_eval(&shares, &census, 0.05).unwrap();
        let get = |iso| r.results.iter().find(|x| x.country == c(iso)).unwrap();
        assert_eq!(get("CAN").tpr, Some(1.0));
        assert_eq!(get("CAN").fp_count, 0);
        assert_eq!(get("DEU").tpr, Some(1.0));
        assert_eq!(get("DEU").fp_count, 2);
        assert_eq!(get("DEU").false_positives, set(&["eng", "spa"]));
        assert_eq!(get("BRA").tpr, None);
        assert_eq!(get("BRA").fp_count, 1);
        assert_eq!(r.empty_truth().collect::<Vec<_>>(), vec![c("BRA")]);
        assert_eq!(r.no_census, vec![c("USA")]);
        assert!(r.no_corpus.is_empty());
        assert!(inventory_eval(&shares, &census, 1.5).is_err());
    }
}
