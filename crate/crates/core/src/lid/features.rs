use alloc::vec::Vec;

use crate::hash::fnv1a64;

/// Sparse, L2-normalized bag of hashed character trigrams.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl FeatureVector {
    /// Bucket ids, strictly increasing.
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v * v).sum())
    }
}

/// Hash bucket of a single trigram, given as its UTF-8 bytes.
#[inline]
pub fn trigram_bucket(trigram: &[u8], feature_dim: u32) -> u32 {
    (fnv1a64(trigram) % u64::from(feature_dim)) as u32
}

/// Returns `None` when `text` has fewer than three code points.
///
/// Trigrams are windows of three consecutive code points with no boundary
/// padding. Each is hashed over its UTF-8 bytes with FNV-1a and reduced
/// modulo `feature_dim`; bucket counts are then scaled to unit length.
pub fn featurize(text: &str, feature_dim: u32) -> Option<FeatureVector> {
    debug_assert!(feature_dim > 0);
    // Byte offsets of every code point plus the end, so each trigram is a
    // plain subslice of the input.
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    if bounds.len() < 3 {
        return None;
    }
    bounds.push(text.len());
    let bytes = text.as_bytes();

    let mut buckets: Vec<u32> = bounds
        .windows(4)
        .map(|w| trigram_bucket(&bytes[w[0]..w[3]], feature_dim))
        .collect();
    buckets.sort_unstable();

    let mut indices = Vec::new();
    let mut values = Vec::new();
    for &b in &buckets {
        if indices.last() == Some(&b) {
            *values.last_mut().unwrap() += 1.0;
        } else {
            indices.push(b);
            values.push(1.0);
        }
    }
    let norm = libm::sqrt(values.iter().map(|v: &f64| v * v).sum());
    for v in &mut values {
        *v /= norm;
    }
    Some(FeatureVector { indices, values })
}
