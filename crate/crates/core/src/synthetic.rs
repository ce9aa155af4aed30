//! Synthetic languages for fixtures and benchmarks.
//!
//! Each language draws words from its own code-point alphabet, so a correct
//! trigram classifier can separate them perfectly.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::lid::LanguageLabel;

#[derive(Debug, Clone)]
pub struct SyntheticLanguage {
    label: LanguageLabel,
    alphabet: Vec<char>,
}

impl SyntheticLanguage {
    pub fn new(label: LanguageLabel, alphabet: Vec<char>) -> Self {
        assert!(!alphabet.is_empty());
        SyntheticLanguage { label, alphabet }
    }

    /// Five languages `lga`..`lge` over disjoint alphabets: Latin a-m,
    /// Latin n-z, Greek, Cyrillic, Armenian lowercase.
    pub fn builtin() -> Vec<SyntheticLanguage> {
        let ranges: [(&str, char, char); 5] = [
            ("lga", 'a', 'm'),
            ("lgb", 'n', 'z'),
            ("lgc", '\u{03b1}', '\u{03c9}'),
            ("lgd", '\u{0430}', '\u{044f}'),
            ("lge", '\u{0561}', '\u{0586}'),
        ];
        ranges
            .iter()
            .map(|&(code, lo, hi)| {
                SyntheticLanguage::new(code.parse().unwrap(), (lo..=hi).collect())
            })
            .collect()
    }

    pub fn label(&self) -> LanguageLabel {
        self.label
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// A random word of 2 to 8 letters.
    pub fn word<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let len = rng.gen_range(2..=8);
        (0..len)
            .map(|_| self.alphabet[rng.gen_range(0..self.alphabet.len())])
            .collect()
    }

    /// `n_words` space-separated words.
    pub fn words<R: Rng + ?Sized>(&self, rng: &mut R, n_words: usize) -> String {
        let mut out = String::new();
        for i in 0..n_words {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&self.word(rng));
        }
        out
    }

    /// Running text of exactly `n_chars` code points.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n_chars: usize) -> String {
        let mut out = String::new();
        let mut len = 0;
        while len < n_chars {
            if len > 0 {
                out.push(' ');
                len += 1;
            }
            let w = self.word(rng);
            len += w.chars().count();
            out.push_str(&w);
        }
        out.chars().take(n_chars).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alphabets_are_disjoint() {
        let langs = SyntheticLanguage::builtin();
        for (i, a) in langs.iter().enumerate() {
            for b in &langs[i + 1..] {
                assert!(a.alphabet().iter().all(|c| !b.alphabet().contains(c)));
            }
        }
    }

    #[test]
    fn sample_has_exact_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for lang in SyntheticLanguage::builtin() {
            for n in [1, 49, 50, 51, 200] {
                assert_eq!(lang.sample(&mut rng, n).chars().count(), n);
            }
            assert_eq!(lang.words(&mut rng, 7).split(' ').count(), 7);
        }
    }
}
