//! Bagged random trees combined by majority vote.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Criterion, Node, TreeBuilder};
use super::TrainingSet;

/// `⌊log₂ d⌋ + 1` attributes are considered at each split by default.
pub fn default_features_per_split(n_features: usize) -> usize {
    (usize::BITS - 1 - n_features.max(1).leading_zeros()) as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub n_classes: usize,
    pub trees: Vec<Node>,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and subspaces from `seed + t`.
    pub(crate) fn train(data: &TrainingSet<'_>, n_trees: usize, features_per_split: Option<usize>, seed: u64) -> Self {
        let n = data.x.rows();
        let k = features_per_split.unwrap_or_else(|| default_features_per_split(data.x.cols())).min(data.x.cols());
        let trees = (0..n_trees as u64)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut builder = TreeBuilder {
                    x: data.x,
                    y: data.y,
                    n_classes: data.n_classes,
                    criterion: Criterion::InfoGain,
                    min_leaf: 1,
                    subspace: Some((k, &mut rng)),
                };
                builder.build(rows)
            })
            .collect();
        Self { n_features: data.x.cols(), n_classes: data.n_classes, trees }
    }

    /// Fraction of trees voting for each class.
    pub(crate) fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1.0;
        }
        let total = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= total);
        votes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_size() {
        assert_eq!(default_features_per_split(84), 7);
        assert_eq!(default_features_per_split(64), 7);
        assert_eq!(default_features_per_split(2), 2);
        assert_eq!(default_features_per_split(1), 1);
    }
}
