//! k-nearest neighbours with Euclidean distance and majority vote.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::linalg::{squared_distance, Matrix};

/// Stores its training rows by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub n_classes: usize,
    pub points: Matrix,
    pub labels: Vec<usize>,
}

impl Knn {
    pub(crate) fn train(data: &TrainingSet<'_>, k: usize) -> Self {
        Self { k, n_classes: data.n_classes, points: data.x.clone(), labels: data.y.to_vec() }
    }

    /// Indices of the `k` nearest training rows; equal distances keep the
    /// lower training index.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let k = self.k.min(self.labels.len());
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, row) in self.points.iter_rows().enumerate() {
            let d = squared_distance(row, x);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(k);
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn scores(&self, x: &[f64]) -> Vec<f64> {
        let nn = self.neighbours(x);
        let mut votes = vec![0.0; self.n_classes];
        for &i in &nn {
            votes[self.labels[i]] += 1.0;
        }
        let k = nn.len() as f64;
        votes.iter_mut().for_each(|v| *v /= k);
        votes
    }
}
