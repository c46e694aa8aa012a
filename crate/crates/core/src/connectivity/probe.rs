//! Linear probe used to measure how separable two groups are.
//!
//! L2-regularized logistic regression on standardized features, trained by
//! mini-batch SGD for a fixed number of epochs. Nothing adapts to the test
//! split; the same configuration is used for every pair.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    /// Inputs are box-downsampled until both sides are at most this.
    pub max_side: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            epochs: 60,
            learning_rate: 0.05,
            l2: 1e-2,
            batch_size: 32,
            max_side: 16,
        }
    }
}

impl ProbeConfig {
    pub fn describe(&self) -> String {
        format!(
            "logistic regression, l2={}, sgd lr={} batch={} epochs={}, inputs box-downsampled to <= {}x{}",
            self.l2, self.learning_rate, self.batch_size, self.epochs, self.max_side, self.max_side
        )
    }
}

/// Rows of features with 0/1 labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<f64>, label: u8) {
        self.rows.push(row);
        self.labels.push(label);
    }
}

/// Box-averages a tensor down to at most `max_side` per axis and flattens it.
pub fn probe_features(tensor: &Tensor, max_side: usize) -> Vec<f64> {
    let (h, w, c) = tensor.shape();
    let max_side = max_side.max(1);
    let fy = h.div_ceil(max_side);
    let fx = w.div_ceil(max_side);
    let (oh, ow) = (h.div_ceil(fy), w.div_ceil(fx));
    let mut out = vec![0.0; oh * ow * c];
    let mut counts = vec![0usize; oh * ow];
    for y in 0..h {
        for x in 0..w {
            let cell = (y / fy) * ow + x / fx;
            counts[cell] += 1;
            for ch in 0..c {
                out[cell * c + ch] += tensor.get(y, x, ch);
            }
        }
    }
    for (cell, &n) in counts.iter().enumerate() {
        for ch in 0..c {
            out[cell * c + ch] /= n as f64;
        }
    }
    out
}

/// Trained probe: standardization plus a linear decision function.
#[derive(Debug, Clone)]
pub struct LinearProbe {
    mean: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearProbe {
    pub fn fit<R: Rng + ?Sized>(train: &FeatureSet, cfg: &ProbeConfig, rng: &mut R) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptySplit("train"));
        }
        if !(train.labels.contains(&0) && train.labels.contains(&1)) {
            return Err(Error::SingleLabel);
        }
        let dim = train.rows[0].len();
        let n = train.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in &train.rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; dim];
        for row in &train.rows {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in &mut scale {
            // constant features carry no signal; leave them centered at zero
            *s = if *s > 1e-12 { 1.0 / s.sqrt() } else { 0.0 };
        }
        let mut probe = LinearProbe {
            mean,
            scale,
            weights: vec![0.0; dim],
            bias: 0.0,
        };
        let xs: Vec<Vec<f64>> = train.rows.iter().map(|r| probe.standardize(r)).collect();

        let mut order: Vec<usize> = (0..xs.len()).collect();
        let batch = cfg.batch_size.max(1);
        let mut grad = vec![0.0; dim];
        for _ in 0..cfg.epochs {
            order.shuffle(rng);
            for chunk in order.chunks(batch) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let mut grad_b = 0.0;
                for &i in chunk {
                    let err = sigmoid(probe.logit_std(&xs[i])) - f64::from(train.labels[i]);
                    for (g, x) in grad.iter_mut().zip(&xs[i]) {
                        *g += err * x;
                    }
                    grad_b += err;
                }
                let m = chunk.len() as f64;
                for (w, g) in probe.weights.iter_mut().zip(&grad) {
                    *w -= cfg.learning_rate * (g / m + cfg.l2 * *w);
                }
                probe.bias -= cfg.learning_rate * grad_b / m;
            }
        }
        Ok(probe)
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) * s)
            .collect()
    }

    fn logit_std(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.logit_std(&self.standardize(row)) > 0.0)
    }

    /// Fraction of misclassified rows.
    pub fn error_rate(&self, set: &FeatureSet) -> f64 {
        let wrong = set
            .rows
            .iter()
            .zip(&set.labels)
            .filter(|(r, &l)| self.predict(r) != l)
            .count();
        wrong as f64 / set.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::derive_stream;

    #[test]
    fn downsampling_averages_blocks() {
        let t = Tensor::new(2, 4, 1, vec![0.0, 1.0, 0.5, 0.5, 1.0, 0.0, 0.5, 0.5]).unwrap();
        assert_eq!(probe_features(&t, 2), vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(probe_features(&t, 1), vec![0.5]);
        let big = Tensor::filled(32, 32, 3, 0.25).unwrap();
        let f = probe_features(&big, 16);
        assert_eq!(f.len(), 16 * 16 * 3);
        assert!(f.iter().all(|v| (v - 0.25).abs() < 1e-15));
        // odd sizes still cover every pixel
        assert_eq!(probe_features(&Tensor::zeros(17, 5, 1).unwrap(), 16).len(), 9 * 5);
    }

    #[test]
    fn single_label_is_rejected() {
        let mut set = FeatureSet::default();
        set.push(vec![1.0], 0);
        set.push(vec![2.0], 0);
        let err = LinearProbe::fit(&set, &ProbeConfig::default(), &mut derive_stream(0, 0));
        assert!(matches!(err, Err(Error::SingleLabel)));
        let err = LinearProbe::fit(&FeatureSet::default(), &ProbeConfig::default(), &mut derive_stream(0, 0));
        assert!(matches!(err, Err(Error::EmptySplit("train"))));
    }

    #[test]
    fn separable_data_is_learned() {
        let mut set = FeatureSet::default();
        for i in 0..40 {
            let x = i as f64 / 40.0;
            set.push(vec![x, 0.3], 0);
            set.push(vec![x + 5.0, 0.3], 1);
        }
        let probe = LinearProbe::fit(&set, &ProbeConfig::default(), &mut derive_stream(0, 0)).unwrap();
        assert_eq!(probe.error_rate(&set), 0.0);
    }
}
