//! C4.5-style pruned decision tree.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{prune, Criterion, Node, TreeBuilder};
use super::TrainingSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct J48 {
    pub n_features: usize,
    pub n_classes: usize,
    pub root: Node,
}

impl J48 {
    pub(crate) fn train(data: &TrainingSet<'_>, confidence: f64, min_leaf: usize) -> Self {
        let mut builder: TreeBuilder<'_, ChaCha8Rng> = TreeBuilder {
            x: data.x,
            y: data.y,
            n_classes: data.n_classes,
            criterion: Criterion::GainRatio,
            min_leaf,
            subspace: None,
        };
        let unpruned = builder.build((0..data.x.rows()).collect());
        Self { n_features: data.x.cols(), n_classes: data.n_classes, root: prune(unpruned, confidence) }
    }

    pub(crate) fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { counts, .. } => {
                    let total: f64 = counts.iter().sum();
                    return counts.iter().map(|c| c / total).collect();
                }
                Node::Split { feature, threshold, left, right, .. } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}
