//! Character-trigram language identification.
//!
//! Text is mapped to a hashed, unit-length bag of code-point trigrams
//! ([`featurize`]) and classified by a one-hidden-layer ReLU network with a
//! softmax output ([`mlp::Mlp`]). Training is plain mini-batch SGD driven
//! by a single seeded ChaCha8 stream, so a fixed `(samples, config)` pair
//! always produces the same weights.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod eval;
mod features;
pub mod mlp;

pub use eval::{EvalReport, LabelMetrics};
pub use features::{featurize, trigram_bucket, FeatureVector};
use mlp::Mlp;

/// ISO 639-3 language code: exactly three lowercase ASCII letters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageLabel([u8; 3]);

impl LanguageLabel {
    pub(crate) const MIN: LanguageLabel = LanguageLabel(*b"aaa");
    pub(crate) const MAX: LanguageLabel = LanguageLabel(*b"zzz");

    /// Caller guarantees three lowercase ASCII letters.
    #[cfg(test)]
    pub(crate) const fn from_bytes(code: [u8; 3]) -> Self {
        LanguageLabel(code)
    }

    pub fn new(code: &str) -> Result<Self, LidError> {
        match code.as_bytes() {
            &[a, b, c] if [a, b, c].iter().all(u8::is_ascii_lowercase) => {
                Ok(LanguageLabel([a, b, c]))
            }
            _ => Err(LidError::InvalidLabel),
        }
    }

    pub fn as_str(&self) -> &str {
        // Only ever built from ASCII.
        core::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for LanguageLabel {
    type Err = LidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageLabel::new(s)
    }
}

impl fmt::Display for LanguageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for LanguageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LanguageLabel({})", self.as_str())
    }
}

/// Hyperparameters. Only `feature_dim`, `hidden_dim` and `min_chars` affect
/// prediction; the rest drive training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Number of hash buckets.
    pub feature_dim: u32,
    pub hidden_dim: u32,
    /// Shortest input, in code points, the model accepts.
    pub min_chars: u32,
    pub seed: u64,
    pub epochs: u32,
    pub learning_rate: f64,
    pub batch_size: u32,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            feature_dim: 1 << 18,
            hidden_dim: 256,
            min_chars: 50,
            seed: 0x6c69_645f_7365_6564,
            epochs: 8,
            learning_rate: 0.5,
            batch_size: 32,
        }
    }
}

impl ModelConfig {
    pub const MIN_FEATURE_DIM: u32 = 1 << 10;

    pub fn validate(&self) -> Result<(), LidError> {
        let bad = |what| Err(LidError::InvalidConfig(what));
        if self.feature_dim < Self::MIN_FEATURE_DIM {
            return bad("feature_dim must be at least 1024");
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be positive");
        }
        if self.min_chars < 3 {
            return bad("min_chars must be at least 3");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be a positive number");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LidError {
    /// Fewer than three code points: no trigram exists.
    TooShort,
    BelowMinChars {
        chars: usize,
        min_chars: u32,
    },
    EmptyDataset,
    SingleClass,
    SampleTooShort {
        index: usize,
    },
    EmptyTestSet,
    InvalidLabel,
    DuplicateLabel(LanguageLabel),
    InvalidConfig(&'static str),
    /// Weight arrays do not match the declared dimensions.
    ShapeMismatch,
    NonFiniteWeight,
}

impl fmt::Display for LidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LidError::TooShort => f.write_str("text has fewer than 3 code points"),
            LidError::BelowMinChars { chars, min_chars } => write!(
                f,
                "text has {chars} code points, model requires at least {min_chars}"
            ),
            LidError::EmptyDataset => f.write_str("training set is empty"),
            LidError::SingleClass => f.write_str("training set needs at least 2 distinct labels"),
            LidError::SampleTooShort { index } => {
                write!(f, "training sample {index} is shorter than min_chars")
            }
            LidError::EmptyTestSet => f.write_str("test set is empty"),
            LidError::InvalidLabel => {
                f.write_str("language label must be 3 lowercase ASCII letters")
            }
            LidError::DuplicateLabel(l) => write!(f, "duplicate label {l}"),
            LidError::InvalidConfig(what) => write!(f, "invalid model config: {what}"),
            LidError::ShapeMismatch => f.write_str("weight arrays do not match model dimensions"),
            LidError::NonFiniteWeight => f.write_str("model contains non-finite weights"),
        }
    }
}

impl core::error::Error for LidError {}

/// A trained classifier. Immutable once built; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LidModel {
    config: ModelConfig,
    labels: Vec<LanguageLabel>,
    net: Mlp<f32>,
}

impl LidModel {
    /// Reassembles a model from stored parts, `w1` given `(hidden, feature)`
    /// row-major.
    pub fn from_parts(
        config: ModelConfig,
        labels: Vec<LanguageLabel>,
        w1_row_major: &[f32],
        b1: Vec<f32>,
        w2: Vec<f32>,
        b2: Vec<f32>,
    ) -> Result<Self, LidError> {
        config.validate()?;
        check_labels(&labels)?;
        let net = Mlp::from_row_major(
            config.feature_dim as usize,
            config.hidden_dim as usize,
            labels.len(),
            w1_row_major,
            b1,
            w2,
            b2,
        )
        .ok_or(LidError::ShapeMismatch)?;
        if !net.all_finite() {
            return Err(LidError::NonFiniteWeight);
        }
        Ok(LidModel {
            config,
            labels,
            net,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn labels(&self) -> &[LanguageLabel] {
        &self.labels
    }

    pub fn network(&self) -> &Mlp<f32> {
        &self.net
    }

    fn features(&self, text: &str) -> Result<FeatureVector, LidError> {
        let chars = text.chars().count();
        if chars < self.config.min_chars as usize {
            return Err(LidError::BelowMinChars {
                chars,
                min_chars: self.config.min_chars,
            });
        }
        featurize(text, self.config.feature_dim).ok_or(LidError::TooShort)
    }

    /// Softmax distribution over [`LidModel::labels`].
    pub fn probabilities(&self, text: &str) -> Result<Vec<f64>, LidError> {
        let x = self.features(text)?;
        Ok(mlp::softmax(&self.net.forward(&x).logits))
    }

    /// Most probable label and its probability. Ties go to the label that
    /// comes first in the inventory.
    pub fn predict(&self, text: &str) -> Result<(LanguageLabel, f64), LidError> {
        let probs = self.probabilities(text)?;
        let (best, p) =
            probs
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, &p)| {
                    if p > bp {
                        (i, p)
                    } else {
                        (bi, bp)
                    }
                });
        Ok((self.labels[best], p))
    }

    /// Scores the model on labelled samples.
    pub fn evaluate<S: AsRef<str>>(
        &self,
        test: &[(S, LanguageLabel)],
    ) -> Result<EvalReport, LidError> {
        if test.is_empty() {
            return Err(LidError::EmptyTestSet);
        }
        let mut pairs = Vec::with_capacity(test.len());
        for (text, truth) in test {
            let (predicted, _) = self.predict(text.as_ref())?;
            pairs.push((*truth, predicted));
        }
        Ok(EvalReport::from_pairs(pairs, self.labels.iter().copied()))
    }
}

fn check_labels(labels: &[LanguageLabel]) -> Result<(), LidError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(*l) {
            return Err(LidError::DuplicateLabel(*l));
        }
    }
    if labels.len() < 2 {
        return Err(LidError::SingleClass);
    }
    Ok(())
}

/// Trains a model on `(text, label)` pairs.
///
/// The label inventory is the sorted set of labels in `samples`. Weights
/// are initialized and the sample order shuffled each epoch from one
/// ChaCha8 stream seeded with `config.seed`.
pub fn train<S: AsRef<str>>(
    samples: &[(S, LanguageLabel)],
    config: &ModelConfig,
) -> Result<LidModel, LidError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(LidError::EmptyDataset);
    }
    for (index, (text, _)) in samples.iter().enumerate() {
        if text.as_ref().chars().count() < config.min_chars as usize {
            return Err(LidError::SampleTooShort { index });
        }
    }
    let labels: Vec<LanguageLabel> = samples
        .iter()
        .map(|(_, l)| *l)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.len() < 2 {
        return Err(LidError::SingleClass);
    }

    let data: Vec<(FeatureVector, usize)> = samples
        .iter()
        .map(|(text, label)| {
            let x = featurize(text.as_ref(), config.feature_dim).expect("length checked above");
            let y = labels.binary_search(label).expect("label in inventory");
            (x, y)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net: Mlp<f32> = Mlp::init(
        config.feature_dim as usize,
        config.hidden_dim as usize,
        labels.len(),
        &mut rng,
    );
    let rate = config.learning_rate as f32;
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size as usize) {
            let g = net.gradients(batch.iter().map(|&i| (&data[i].0, data[i].1)));
            net.apply(&g, rate);
        }
    }
    if !net.all_finite() {
        return Err(LidError::NonFiniteWeight);
    }

    Ok(LidModel {
        config: *config,
        labels,
        net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::SyntheticLanguage;
    use alloc::string::String;

    fn small_config() -> ModelConfig {
        ModelConfig {
            feature_dim: 1 << 12,
            hidden_dim: 32,
            epochs: 10,
            ..ModelConfig::default()
        }
    }

    fn two_language_set(n: usize, seed: u64) -> Vec<(String, LanguageLabel)> {
        let langs = SyntheticLanguage::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for _ in 0..n {
            for lang in &langs[..2] {
                out.push((lang.sample(&mut rng, 50), lang.label()));
            }
        }
        out
    }

    #[test]
    fn label_validation() {
        assert!(LanguageLabel::new("eng").is_ok());
        for bad in ["en", "engl", "ENG", "e1g", "éng", ""] {
            assert_eq!(
                LanguageLabel::new(bad),
                Err(LidError::InvalidLabel),
                "{bad}"
            );
        }
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let c = ModelConfig {
            feature_dim: 512,
            ..ModelConfig::default()
        };
        assert!(matches!(c.validate(), Err(LidError::InvalidConfig(_))));
        let c = ModelConfig {
            min_chars: 2,
            ..ModelConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn train_errors() {
        let cfg = small_config();
        let empty: [(&str, LanguageLabel); 0] = [];
        assert_eq!(train(&empty, &cfg), Err(LidError::EmptyDataset));

        let eng: LanguageLabel = "eng".parse().unwrap();
        let long = "x".repeat(60);
        let single = [(long.as_str(), eng), (long.as_str(), eng)];
        assert_eq!(train(&single, &cfg), Err(LidError::SingleClass));

        let fra: LanguageLabel = "fra".parse().unwrap();
        let short = [(long.as_str(), eng), ("too short", fra)];
        assert_eq!(
            train(&short, &cfg),
            Err(LidError::SampleTooShort { index: 1 })
        );
    }

    #[test]
    fn train_is_deterministic() {
        let data = two_language_set(50, 4);
        let a = train(&data, &small_config()).unwrap();
        let b = train(&data, &small_config()).unwrap();
        assert_eq!(a, b);
        let other_seed = ModelConfig {
            seed: 99,
            ..small_config()
        };
        assert_ne!(a, train(&data, &other_seed).unwrap());
    }

    #[test]
    fn predict_contract() {
        let data = two_language_set(200, 5);
        let model = train(&data, &small_config()).unwrap();
        let lang = &SyntheticLanguage::builtin()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(77);

        let text = lang.sample(&mut rng, 50);
        let (label, p) = model.predict(&text).unwrap();
        assert_eq!(label, lang.label());
        assert!(p >= 0.9, "confidence {p}");
        let probs = model.probabilities(&text).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert_eq!(probs.iter().cloned().fold(0.0, f64::max), p);

        let short = lang.sample(&mut rng, 49);
        assert_eq!(
            model.predict(&short),
            Err(LidError::BelowMinChars {
                chars: 49,
                min_chars: 50
            })
        );
    }

    #[test]
    fn ties_go_to_first_label() {
        let cfg = ModelConfig {
            feature_dim: 1024,
            hidden_dim: 2,
            ..ModelConfig::default()
        };
        let labels = vec!["bbb".parse().unwrap(), "aaa".parse().unwrap()];
        let model = LidModel::from_parts(
            cfg,
            labels,
            &[0.0; 2048],
            vec![0.0; 2],
            vec![0.0; 4],
            vec![0.0; 2],
        )
        .unwrap();
        let (label, p) = model.predict(&"q".repeat(50)).unwrap();
        assert_eq!(label.as_str(), "bbb");
        assert_eq!(p, 0.5);
    }

    #[test]
    fn from_parts_rejects_bad_shapes() {
        let cfg = ModelConfig {
            feature_dim: 1024,
            hidden_dim: 2,
            ..ModelConfig::default()
        };
        let labels = || vec!["aaa".parse().unwrap(), "bbb".parse().unwrap()];
        let r = LidModel::from_parts(
            cfg,
            labels(),
            &[0.0; 2047],
            vec![0.0; 2],
            vec![0.0; 4],
            vec![0.0; 2],
        );
        assert_eq!(r, Err(LidError::ShapeMismatch));
        let r = LidModel::from_parts(
            cfg,
            labels(),
            &[0.0; 2048],
            vec![f32::NAN, 0.0],
            vec![0.0; 4],
            vec![0.0; 2],
        );
        assert_eq!(r, Err(LidError::NonFiniteWeight));
        let dup = vec!["aaa".parse().unwrap(), "aaa".parse().unwrap()];
        let r = LidModel::from_parts(
            cfg,
            dup,
            &[0.0; 2048],
            vec![0.0; 2],
            vec![0.0; 4],
            vec![0.0; 2],
        );
        assert!(matches!(r, Err(LidError::DuplicateLabel(_))));
    }

    #[test]
    fn evaluate_requires_data() {
        let data = two_language_set(20, 1);
        let model = train(&data, &small_config()).unwrap();
        let empty: [(&str, LanguageLabel); 0] = [];
        assert_eq!(model.evaluate(&empty), Err(LidError::EmptyTestSet));
        let report = model.evaluate(&data).unwrap();
        assert_eq!(report.n_samples, data.len() as u64);
    }
}
