//! Binary decision trees over numeric attributes, shared by J48 and the
//! random forest.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{argmax, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
        counts: Vec<f64>,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        counts: Vec<f64>,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn leaf(counts: Vec<f64>) -> Self {
        Node::Leaf { class: argmax(&counts), counts }
    }

    pub fn counts(&self) -> &[f64] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => counts,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { class, .. } => return *class,
                Node::Split { feature, threshold, left, right, .. } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Visits every split node with its own and its children's class counts.
    pub fn for_each_split(&self, f: &mut impl FnMut(&[f64], &[f64], &[f64])) {
        if let Node::Split { counts, left, right, .. } = self {
            f(counts, left.counts(), right.counts());
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }

    /// Training errors if every leaf predicts its majority class.
    fn subtree_errors(&self) -> f64 {
        match self {
            Node::Leaf { counts, .. } => leaf_errors(counts),
            Node::Split { left, right, .. } => left.subtree_errors() + right.subtree_errors(),
        }
    }
}

fn leaf_errors(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    total - counts[argmax(counts)]
}

pub(crate) fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -counts.iter().filter(|&&c| c > 0.0).map(|&c| (c / total) * (c / total).log2()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Criterion {
    /// C4.5: gain ratio with the threshold-count (MDL) correction, restricted
    /// to attributes whose gain reaches the average.
    GainRatio,
    /// Plain information gain, as in random trees.
    InfoGain,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    split_info: f64,
}

pub(crate) struct TreeBuilder<'a, R> {
    pub x: &'a Matrix,
    pub y: &'a [usize],
    pub n_classes: usize,
    pub criterion: Criterion,
    pub min_leaf: usize,
    /// Random-subspace size and generator; `None` evaluates every feature.
    pub subspace: Option<(usize, &'a mut R)>,
}

impl<R: Rng> TreeBuilder<'_, R> {
    pub fn build(&mut self, rows: Vec<usize>) -> Node {
        let counts = self.class_counts(&rows);
        let n = rows.len() as f64;
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || rows.len() < 2 * self.min_leaf {
            return Node::leaf(counts);
        }
        let Some(best) = self.best_split(&rows, &counts) else {
            return Node::leaf(counts);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.x[(r, best.feature)] <= best.threshold);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty() && n > 0.0);
        let left = Box::new(self.build(left_rows));
        let right = Box::new(self.build(right_rows));
        Node::Split { feature: best.feature, threshold: best.threshold, counts, left, right }
    }

    fn class_counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_classes];
        for &r in rows {
            counts[self.y[r]] += 1.0;
        }
        counts
    }

    fn min_split(&self, n: usize) -> usize {
        match self.criterion {
            Criterion::GainRatio => {
                let m = 0.1 * n as f64 / self.n_classes as f64;
                (m.min(25.0) as usize).max(self.min_leaf)
            }
            Criterion::InfoGain => self.min_leaf,
        }
    }

    /// Best threshold on one feature by information gain.
    fn evaluate_feature(
        &self,
        rows: &[usize],
        counts: &[f64],
        feature: usize,
        scratch: &mut Vec<(f64, usize)>,
    ) -> Option<Candidate> {
        scratch.clear();
        scratch.extend(rows.iter().map(|&r| (self.x[(r, feature)], self.y[r])));
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = scratch.len();
        let min_split = self.min_split(n);
        let parent = entropy(counts);
        let mut left = vec![0.0; self.n_classes];
        let mut right = counts.to_vec();
        let mut best: Option<(f64, usize)> = None;
        let mut n_thresholds = 0usize;
        for i in 0..n - 1 {
            let (v, c) = scratch[i];
            left[c] += 1.0;
            right[c] -= 1.0;
            if v >= scratch[i + 1].0 {
                continue;
            }
            let nl = i + 1;
            if nl < min_split || n - nl < min_split {
                continue;
            }
            n_thresholds += 1;
            let gain =
                parent - (nl as f64 / n as f64) * entropy(&left) - ((n - nl) as f64 / n as f64) * entropy(&right);
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        let (mut gain, i) = best?;
        if self.criterion == Criterion::GainRatio {
            gain -= (n_thresholds as f64).log2() / n as f64;
        }
        if gain <= 1e-12 {
            return None;
        }
        let (lo, hi) = (scratch[i].0, scratch[i + 1].0);
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        let pl = (i + 1) as f64 / n as f64;
        let split_info = -(pl * pl.log2() + (1.0 - pl) * (1.0 - pl).log2());
        Some(Candidate { feature, threshold, gain, split_info })
    }

    fn best_split(&mut self, rows: &[usize], counts: &[f64]) -> Option<Candidate> {
        let d = self.x.cols();
        let mut scratch = Vec::with_capacity(rows.len());
        match self.criterion {
            Criterion::GainRatio => {
                let candidates: Vec<Candidate> =
                    (0..d).filter_map(|f| self.evaluate_feature(rows, counts, f, &mut scratch)).collect();
                if candidates.is_empty() {
                    return None;
                }
                let avg_gain = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
                let mut best: Option<(f64, Candidate)> = None;
                for c in candidates {
                    if c.gain >= avg_gain - 1e-3 {
                        let ratio = c.gain / c.split_info;
                        if best.is_none_or(|(r, _)| ratio > r) {
                            best = Some((ratio, c));
                        }
                    }
                }
                best.map(|(_, c)| c)
            }
            Criterion::InfoGain => {
                let mut order: Vec<usize> = (0..d).collect();
                let k = match self.subspace.as_mut() {
                    Some((k, rng)) => {
                        order.shuffle(*rng);
                        *k
                    }
                    None => d,
                };
                // Keep drawing past k attributes until one has positive gain.
                let mut best: Option<Candidate> = None;
                for (tried, &f) in order.iter().enumerate() {
                    if tried >= k && best.is_some() {
                        break;
                    }
                    if let Some(c) = self.evaluate_feature(rows, counts, f, &mut scratch) {
                        if best.is_none_or(|b| c.gain > b.gain) {
                            best = Some(c);
                        }
                    }
                }
                best
            }
        }
    }
}

/// Upper confidence bound on the number of errors among `n` cases with `e`
/// observed errors, minus `e`; used for pessimistic pruning.
pub(crate) fn added_errors(n: f64, e: f64, confidence: f64) -> f64 {
    if e < 1.0 {
        let base = n * (1.0 - confidence.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, confidence) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = normal_quantile(1.0 - confidence);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    r * n - e
}

/// Inverse standard normal CDF by bisection on `erf`.
pub(crate) fn normal_quantile(p: f64) -> f64 {
    let cdf = |z: f64| 0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2));
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Collapses splits that do not reduce training error, then replaces
/// subtrees whose pessimistic error estimate is not better than a leaf's.
pub(crate) fn prune(node: Node, confidence: f64) -> Node {
    let node = collapse(node);
    prune_inner(node, confidence).0
}

fn collapse(node: Node) -> Node {
    match node {
        Node::Leaf { .. } => node,
        Node::Split { feature, threshold, counts, left, right } => {
            let left = collapse(*left);
            let right = collapse(*right);
            let subtree = left.subtree_errors() + right.subtree_errors();
            if subtree >= leaf_errors(&counts) - 1e-3 {
                Node::leaf(counts)
            } else {
                Node::Split { feature, threshold, counts, left: Box::new(left), right: Box::new(right) }
            }
        }
    }
}

fn estimated_leaf_errors(counts: &[f64], confidence: f64) -> f64 {
    let n: f64 = counts.iter().sum();
    let e = leaf_errors(counts);
    e + added_errors(n, e, confidence)
}

fn prune_inner(node: Node, confidence: f64) -> (Node, f64) {
    match node {
        Node::Leaf { ref counts, .. } => {
            let est = estimated_leaf_errors(counts, confidence);
            (node, est)
        }
        Node::Split { feature, threshold, counts, left, right } => {
            let (left, le) = prune_inner(*left, confidence);
            let (right, re) = prune_inner(*right, confidence);
            let as_leaf = estimated_leaf_errors(&counts, confidence);
            if as_leaf <= le + re + 0.1 {
                (Node::leaf(counts), as_leaf)
            } else {
                (Node::Split { feature, threshold, counts, left: Box::new(left), right: Box::new(right) }, le + re)
            }
        }
    }
}
