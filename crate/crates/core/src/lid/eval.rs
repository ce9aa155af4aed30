use alloc::collections::BTreeMap;

use super::LanguageLabel;

/// Precision, recall and F1 for one label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of test samples whose true label is this one.
    pub support: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    tp: u64,
    fp: u64,
    fn_: u64,
}

/// Per-label and macro-averaged classification quality.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_label: BTreeMap<LanguageLabel, LabelMetrics>,
    /// Unweighted mean F1 over labels with non-zero support.
    pub macro_f1: f64,
    pub n_samples: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    /// Builds the report from `(truth, predicted)` pairs. `extra_labels`
    /// are reported even if they never occur (e.g. a model's full
    /// inventory); they carry zero support and do not affect `macro_f1`.
    pub fn from_pairs<I, L>(pairs: I, extra_labels: L) -> Self
    where
        I: IntoIterator<Item = (LanguageLabel, LanguageLabel)>,
        L: IntoIterator<Item = LanguageLabel>,
    {
        let mut tallies: BTreeMap<LanguageLabel, Tally> = BTreeMap::new();
        for l in extra_labels {
            tallies.entry(l).or_default();
        }
        let mut n_samples = 0;
        for (truth, predicted) in pairs {
            n_samples += 1;
            if truth == predicted {
                tallies.entry(truth).or_default().tp += 1;
            } else {
                tallies.entry(truth).or_default().fn_ += 1;
                tallies.entry(predicted).or_default().fp += 1;
            }
        }

        let per_label: BTreeMap<_, _> = tallies
            .into_iter()
            .map(|(label, t)| {
                let precision = ratio(t.tp, t.tp + t.fp);
                let recall = ratio(t.tp, t.tp + t.fn_);
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                let m = LabelMetrics {
                    precision,
                    recall,
                    f1,
                    support: t.tp + t.fn_,
                };
                (label, m)
            })
            .collect();

        let supported: alloc::vec::Vec<f64> = per_label
            .values()
            .filter(|m| m.support > 0)
            .map(|m| m.f1)
            .collect();
        let macro_f1 = if supported.is_empty() {
            0.0
        } else {
            supported.iter().sum::<f64>() / supported.len() as f64
        };

        EvalReport {
            per_label,
            macro_f1,
            n_samples,
        }
    }

    /// Fraction of samples labeled correctly.
    pub fn accuracy(&self) -> f64 {
        let correct: f64 = self
            .per_label
            .values()
            .map(|m| m.recall * m.support as f64)
            .sum();
        correct / self.n_samples as f64
    }
}
