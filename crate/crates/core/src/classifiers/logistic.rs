//! One-vs-all logistic regression fitted by batch gradient descent.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::linalg::dot;

pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLogistic {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs_run: usize,
}

impl BinaryLogistic {
    pub fn probability(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-(dot(&self.weights, x) + self.bias)).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticOvA {
    pub n_features: usize,
    /// One learner per class; `None` for classes absent from training.
    pub learners: Vec<Option<BinaryLogistic>>,
}

fn fit_binary(data: &TrainingSet<'_>, class: usize, l2: f64, learning_rate: f64, epochs: usize) -> BinaryLogistic {
    let d = data.x.cols();
    let n = data.x.rows() as f64;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut grad = vec![0.0; d];
    let mut epochs_run = 0;
    for _ in 0..epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (row, &label) in data.x.iter_rows().zip(data.y) {
            let p = 1.0 / (1.0 + (-(dot(&w, row) + b)).exp());
            let err = p - if label == class { 1.0 } else { 0.0 };
            for (g, x) in grad.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
        }
        let mut norm_sq = 0.0;
        for (g, wi) in grad.iter_mut().zip(&w) {
            *g = *g / n + l2 * wi;
            norm_sq += *g * *g;
        }
        grad_b /= n;
        norm_sq += grad_b * grad_b;
        if norm_sq.sqrt() < GRADIENT_TOLERANCE {
            break;
        }
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= learning_rate * g;
        }
        b -= learning_rate * grad_b;
        epochs_run += 1;
    }
    BinaryLogistic { weights: w, bias: b, epochs_run }
}

impl LogisticOvA {
    pub(crate) fn train(data: &TrainingSet<'_>, l2: f64, learning_rate: f64, epochs: usize) -> Self {
        let present = data.present_classes();
        let learners = (0..data.n_classes)
            .map(|c| present.contains(&c).then(|| fit_binary(data, c, l2, learning_rate, epochs)))
            .collect();
        Self { n_features: data.x.cols(), learners }
    }

    /// Per-class probability; 0 for classes never seen in training.
    pub(crate) fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.learners.iter().map(|l| l.as_ref().map_or(0.0, |l| l.probability(x))).collect()
    }
}
