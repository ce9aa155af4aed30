//! One-hidden-layer perceptron over sparse inputs.
//!
//! ReLU hidden layer, softmax output, mean cross-entropy loss. Generic over
//! the parameter scalar so the same code trains `f32` models and runs the
//! `f64` gradient check.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use super::features::FeatureVector;

/// Network parameters.
///
/// `w1` is stored feature-major (`feature_dim` rows of `hidden_dim`) so a
/// sparse input touches contiguous memory; [`Mlp::w1`] addresses it in the
/// conventional `(hidden, feature)` orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    feature_dim: usize,
    hidden_dim: usize,
    n_out: usize,
    w1: Vec<T>,
    b1: Vec<T>,
    w2: Vec<T>,
    b2: Vec<T>,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub pre: Vec<T>,
    pub hidden: Vec<T>,
    pub logits: Vec<T>,
}

/// Softmax in f64, shifted by the max logit.
pub fn softmax<T: Float>(logits: &[T]) -> Vec<f64> {
    let max = logits
        .iter()
        .map(|l| l.to_f64().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits
        .iter()
        .map(|l| libm::exp(l.to_f64().unwrap() - max))
        .collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

fn cross_entropy<T: Float>(logits: &[T], target: usize) -> f64 {
    let max = logits
        .iter()
        .map(|l| l.to_f64().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    let lse = max
        + libm::log(
            logits
                .iter()
                .map(|l| libm::exp(l.to_f64().unwrap() - max))
                .sum::<f64>(),
        );
    lse - logits[target].to_f64().unwrap()
}

impl<T: Float> Mlp<T> {
    /// Uniform init in `±1/sqrt(fan_in)` for each layer's weights and biases.
    pub fn init<R: Rng + ?Sized>(
        feature_dim: usize,
        hidden_dim: usize,
        n_out: usize,
        rng: &mut R,
    ) -> Self {
        let mut uniform = |n: usize, fan_in: usize| -> Vec<T> {
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            (0..n)
                .map(|_| T::from((rng.gen::<f64>() * 2.0 - 1.0) * bound).unwrap())
                .collect()
        };
        let w1 = uniform(feature_dim * hidden_dim, feature_dim);
        let b1 = uniform(hidden_dim, feature_dim);
        let w2 = uniform(n_out * hidden_dim, hidden_dim);
        let b2 = uniform(n_out, hidden_dim);
        Mlp {
            feature_dim,
            hidden_dim,
            n_out,
            w1,
            b1,
            w2,
            b2,
        }
    }

    /// Builds a network from `w1` in `(hidden, feature)` row-major order.
    /// Returns `None` on any length mismatch.
    pub fn from_row_major(
        feature_dim: usize,
        hidden_dim: usize,
        n_out: usize,
        w1_row_major: &[T],
        b1: Vec<T>,
        w2: Vec<T>,
        b2: Vec<T>,
    ) -> Option<Self> {
        if w1_row_major.len() != feature_dim.checked_mul(hidden_dim)?
            || b1.len() != hidden_dim
            || w2.len() != n_out * hidden_dim
            || b2.len() != n_out
        {
            return None;
        }
        let mut w1 = vec![T::zero(); w1_row_major.len()];
        for h in 0..hidden_dim {
            let row = &w1_row_major[h * feature_dim..(h + 1) * feature_dim];
            for (f, &w) in row.iter().enumerate() {
                w1[f * hidden_dim + h] = w;
            }
        }
        Some(Mlp {
            feature_dim,
            hidden_dim,
            n_out,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn w1(&self, hidden: usize, feature: usize) -> T {
        self.w1[feature * self.hidden_dim + hidden]
    }

    pub fn w1_mut(&mut self, hidden: usize, feature: usize) -> &mut T {
        &mut self.w1[feature * self.hidden_dim + hidden]
    }

    /// `w1` in `(hidden, feature)` row-major order.
    pub fn w1_row_major(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.hidden_dim).flat_map(move |h| (0..self.feature_dim).map(move |f| self.w1(h, f)))
    }

    pub fn b1(&self) -> &[T] {
        &self.b1
    }

    pub fn b1_mut(&mut self) -> &mut [T] {
        &mut self.b1
    }

    /// `n_out × hidden_dim`, row-major.
    pub fn w2(&self) -> &[T] {
        &self.w2
    }

    pub fn w2_mut(&mut self) -> &mut [T] {
        &mut self.w2
    }

    pub fn b2(&self) -> &[T] {
        &self.b2
    }

    pub fn b2_mut(&mut self) -> &mut [T] {
        &mut self.b2
    }

    pub fn all_finite(&self) -> bool {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    pub fn forward(&self, x: &FeatureVector) -> Forward<T> {
        let h = self.hidden_dim;
        let mut pre = self.b1.clone();
        for (idx, val) in x.iter() {
            let val = T::from(val).unwrap();
            let row = &self.w1[idx as usize * h..(idx as usize + 1) * h];
            for (acc, &w) in pre.iter_mut().zip(row) {
                *acc = *acc + w * val;
            }
        }
        let hidden: Vec<T> = pre.iter().map(|&z| z.max(T::zero())).collect();
        let logits = self
            .b2
            .iter()
            .zip(self.w2.chunks_exact(h))
            .map(|(&b, row)| row.iter().zip(&hidden).fold(b, |acc, (&w, &a)| acc + w * a))
            .collect();
        Forward {
            pre,
            hidden,
            logits,
        }
    }

    /// Mean cross-entropy over `(input, class index)` pairs.
    pub fn loss<'a, I>(&self, batch: I) -> f64
    where
        I: IntoIterator<Item = (&'a FeatureVector, usize)>,
    {
        let mut total = 0.0;
        let mut n = 0usize;
        for (x, target) in batch {
            total += cross_entropy(&self.forward(x).logits, target);
            n += 1;
        }
        total / n as f64
    }

    /// Gradient of [`Mlp::loss`] over the same batch.
    pub fn gradients<'a, I>(&self, batch: I) -> Gradients<T>
    where
        I: IntoIterator<Item = (&'a FeatureVector, usize)>,
    {
        let mut g = Gradients::zeros(self.hidden_dim, self.n_out);
        let mut n = 0usize;
        for (x, target) in batch {
            self.accumulate(x, target, &mut g);
            n += 1;
        }
        if n > 0 {
            g.scale(T::one() / T::from(n).unwrap());
        }
        g
    }

    fn accumulate(&self, x: &FeatureVector, target: usize, g: &mut Gradients<T>) {
        let h = self.hidden_dim;
        let fwd = self.forward(x);
        let probs = softmax(&fwd.logits);
        let dlogits: Vec<T> = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| T::from(if k == target { p - 1.0 } else { p }).unwrap())
            .collect();

        let mut dhidden = vec![T::zero(); h];
        for (k, &dl) in dlogits.iter().enumerate() {
            g.b2[k] = g.b2[k] + dl;
            let w_row = &self.w2[k * h..(k + 1) * h];
            let g_row = &mut g.w2[k * h..(k + 1) * h];
            for j in 0..h {
                g_row[j] = g_row[j] + dl * fwd.hidden[j];
                dhidden[j] = dhidden[j] + dl * w_row[j];
            }
        }
        for (d, &z) in dhidden.iter_mut().zip(&fwd.pre) {
            if z <= T::zero() {
                *d = T::zero();
            }
        }
        for (gb, &d) in g.b1.iter_mut().zip(&dhidden) {
            *gb = *gb + d;
        }
        for (idx, val) in x.iter() {
            let val = T::from(val).unwrap();
            let row = g.w1.entry(idx).or_insert_with(|| vec![T::zero(); h]);
            for (gw, &d) in row.iter_mut().zip(&dhidden) {
                *gw = *gw + d * val;
            }
        }
    }

    /// Plain SGD step: `param -= rate * grad`.
    pub fn apply(&mut self, g: &Gradients<T>, rate: T) {
        let h = self.hidden_dim;
        for (&idx, grow) in &g.w1 {
            let row = &mut self.w1[idx as usize * h..(idx as usize + 1) * h];
            for (w, &d) in row.iter_mut().zip(grow) {
                *w = *w - rate * d;
            }
        }
        for (p, &d) in self.b1.iter_mut().zip(&g.b1) {
            *p = *p - rate * d;
        }
        for (p, &d) in self.w2.iter_mut().zip(&g.w2) {
            *p = *p - rate * d;
        }
        for (p, &d) in self.b2.iter_mut().zip(&g.b2) {
            *p = *p - rate * d;
        }
    }
}

/// Gradient with respect to every parameter. Rows of `w1` for features
/// absent from the batch are implicitly zero.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    hidden_dim: usize,
    w1: BTreeMap<u32, Vec<T>>,
    b1: Vec<T>,
    w2: Vec<T>,
    b2: Vec<T>,
}

impl<T: Float> Gradients<T> {
    fn zeros(hidden_dim: usize, n_out: usize) -> Self {
        Gradients {
            hidden_dim,
            w1: BTreeMap::new(),
            b1: vec![T::zero(); hidden_dim],
            w2: vec![T::zero(); n_out * hidden_dim],
            b2: vec![T::zero(); n_out],
        }
    }

    fn scale(&mut self, s: T) {
        let all = self
            .w1
            .values_mut()
            .flat_map(|r| r.iter_mut())
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut());
        for v in all {
            *v = *v * s;
        }
    }

    pub fn w1(&self, hidden: usize, feature: usize) -> T {
        self.w1
            .get(&(feature as u32))
            .map_or(T::zero(), |row| row[hidden])
    }

    /// Features with a (possibly zero) stored gradient row.
    pub fn w1_features(&self) -> impl Iterator<Item = u32> + '_ {
        self.w1.keys().copied()
    }

    pub fn b1(&self) -> &[T] {
        &self.b1
    }

    pub fn w2(&self) -> &[T] {
        &self.w2
    }

    pub fn b2(&self) -> &[T] {
        &self.b2
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lid::features::featurize;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn row_major_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net: Mlp<f32> = Mlp::init(16, 4, 3, &mut rng);
        let w1: Vec<f32> = net.w1_row_major().collect();
        let back = Mlp::from_row_major(
            16,
            4,
            3,
            &w1,
            net.b1().to_vec(),
            net.w2().to_vec(),
            net.b2().to_vec(),
        )
        .unwrap();
        assert_eq!(back, net);
        assert!(Mlp::from_row_major(16, 4, 3, &w1[1..], vec![], vec![], vec![]).is_none());
    }

    #[test]
    fn init_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net: Mlp<f64> = Mlp::init(1024, 8, 2, &mut rng);
        let b1 = 1.0 / 32.0;
        assert!(net.w1_row_major().all(|w| w.abs() <= b1));
        let b2 = 1.0 / libm::sqrt(8.0);
        assert!(net.w2().iter().all(|w| w.abs() <= b2));
    }

    #[test]
    fn softmax_normalizes() {
        let p = softmax(&[1000.0f32, 999.0, -50.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > p[1] && p[1] > p[2]);
    }

    #[test]
    fn sgd_step_reduces_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net: Mlp<f64> = Mlp::init(1024, 8, 2, &mut rng);
        let xs = [
            featurize("aaaa bbbb aaaa", 1024).unwrap(),
            featurize("zzzz yyyy zzzz", 1024).unwrap(),
        ];
        let batch = || xs.iter().zip([0usize, 1]);
        let before = net.loss(batch());
        for _ in 0..20 {
            let g = net.gradients(batch());
            net.apply(&g, 0.5);
        }
        assert!(net.loss(batch()) < before);
    }
}
