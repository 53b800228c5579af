//! Stratified k-fold cross-validation, confusion matrices and TPR metrics.
//!
//! Every fold fits its own preprocessing (standardization, optional PCA)
//! on the training rows only; held-out rows are only ever transformed.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec, TrainedClassifier};
use crate::features::Standardization;
use crate::linalg::Matrix;
use crate::pca::PcaModel;
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldMode {
    /// Rows (window segments) are dealt to folds independently.
    #[default]
    Segment,
    /// All rows of one subject share a fold.
    SubjectGrouped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub mode: FoldMode,
    pub seed: u64,
    /// Fold id of each row.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&r| self.assignment[r] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&r| self.assignment[r] != fold).collect()
    }
}

/// Shuffles the members of each class and deals them round-robin, carrying
/// the fold offset from one class to the next so fold sizes stay within one.
fn deal_stratified(members_by_class: Vec<Vec<usize>>, k: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for mut members in members_by_class {
        members.shuffle(rng);
        for (i, m) in members.iter().enumerate() {
            out.push((*m, (offset + i) % k));
        }
        offset = (offset + members.len()) % k;
    }
    out
}

pub fn make_folds(labels: &[usize], groups: Option<&[&str]>, k: usize, mode: FoldMode, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(alloc::format!("k must be at least 2, got {k}")));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignment = match mode {
        FoldMode::Segment => {
            let mut by_class = vec![Vec::new(); n_classes];
            for (r, &l) in labels.iter().enumerate() {
                by_class[l].push(r);
            }
            check_class_sizes(&by_class, k)?;
            let mut assignment = vec![0; labels.len()];
            for (row, fold) in deal_stratified(by_class, k, &mut rng) {
                assignment[row] = fold;
            }
            assignment
        }
        FoldMode::SubjectGrouped => {
            let groups = groups
                .ok_or_else(|| Error::InvalidParameter("subject-grouped folds need a subject id per row".into()))?;
            if groups.len() != labels.len() {
                return Err(Error::DimensionMismatch { expected: labels.len(), got: groups.len() });
            }
            // Subjects in first-appearance order, labelled by their first row.
            let mut subject_index: BTreeMap<&str, usize> = BTreeMap::new();
            let mut subject_label = Vec::new();
            let mut row_subject = Vec::with_capacity(labels.len());
            for (r, g) in groups.iter().enumerate() {
                let next = subject_label.len();
                let s = *subject_index.entry(g).or_insert(next);
                if s == next {
                    subject_label.push(labels[r]);
                }
                row_subject.push(s);
            }
            let mut by_class = vec![Vec::new(); n_classes];
            for (s, &l) in subject_label.iter().enumerate() {
                by_class[l].push(s);
            }
            check_class_sizes(&by_class, k)?;
            let mut subject_fold = vec![0; subject_label.len()];
            for (s, fold) in deal_stratified(by_class, k, &mut rng) {
                subject_fold[s] = fold;
            }
            row_subject.iter().map(|&s| subject_fold[s]).collect()
        }
    };
    Ok(FoldPlan { k, mode, seed, assignment })
}

fn check_class_sizes(by_class: &[Vec<usize>], k: usize) -> Result<()> {
    for (class, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(Error::ClassTooSmall { class, count: members.len(), k });
        }
    }
    Ok(())
}

/// Counts indexed `[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self { n_classes, counts: vec![vec![0; n_classes]; n_classes] }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Recall per class; `None` where the class has no support.
    pub per_class_tpr: Vec<Option<f64>>,
    /// Mean of the defined per-class TPRs.
    pub macro_tpr: f64,
}

pub fn metrics(confusion: &ConfusionMatrix) -> Result<Metrics> {
    let total = confusion.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let per_class_tpr: Vec<Option<f64>> = (0..confusion.n_classes)
        .map(|c| {
            let support = confusion.support(c);
            (support > 0).then(|| confusion.counts[c][c] as f64 / support as f64)
        })
        .collect();
    let defined: Vec<f64> = per_class_tpr.iter().flatten().copied().collect();
    Ok(Metrics {
        accuracy: confusion.trace() as f64 / total as f64,
        macro_tpr: defined.iter().sum::<f64>() / defined.len() as f64,
        per_class_tpr,
    })
}

/// Anything that can be fit on a training fold and queried per row.
pub trait Learner {
    type Model;

    fn wants_standardized(&self) -> bool;

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Self::Model>;

    fn predict(&self, model: &Self::Model, x: &[f64]) -> Result<usize>;

    /// Echoed into the report when the learner is one of the six built-ins.
    fn spec(&self) -> Option<ClassifierSpec> {
        None
    }
}

impl Learner for ClassifierSpec {
    type Model = TrainedClassifier;

    fn wants_standardized(&self) -> bool {
        ClassifierSpec::wants_standardized(self)
    }

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<TrainedClassifier> {
        classifiers::train(self, x, y, n_classes, seed)
    }

    fn predict(&self, model: &TrainedClassifier, x: &[f64]) -> Result<usize> {
        model.predict(x)
    }

    fn spec(&self) -> Option<ClassifierSpec> {
        Some(*self)
    }
}

/// Standardization and optional PCA fitted on one training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub standardization: Option<Standardization>,
    pub pca: Option<(PcaModel, usize)>,
}

impl Preprocessor {
    /// PCA always works on standardized features, so requesting components
    /// implies standardization.
    pub fn fit(train: &Matrix, standardize: bool, pca_components: Option<usize>) -> Result<Self> {
        let standardization =
            if standardize || pca_components.is_some() { Some(Standardization::fit(train)?) } else { None };
        let pca = match pca_components {
            None => None,
            Some(n) => {
                let z = standardization.as_ref().expect("set above").apply(train)?;
                let model = PcaModel::fit(&z)?;
                if n == 0 || n > model.dim() {
                    return Err(Error::ComponentsOutOfRange { got: n, max: model.dim() });
                }
                Some((model, n))
            }
        };
        Ok(Self { standardization, pca })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        let z = match &self.standardization {
            Some(s) => s.apply(x)?,
            None => x.clone(),
        };
        match &self.pca {
            Some((model, n)) => model.project(&z, *n),
            None => Ok(z),
        }
    }
}

/// Observes which rows each fold fits on and predicts.
pub trait CvProbe {
    fn fitted(&mut self, _fold: usize, _train_rows: &[usize]) {}
    fn predicted(&mut self, _fold: usize, _test_rows: &[usize]) {}
}

impl CvProbe for () {}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CvOptions {
    pub pca_components: Option<usize>,
    /// Fold `f` trains with seed `seed + f`.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub classifier: Option<ClassifierSpec>,
    pub k: usize,
    pub fold_mode: FoldMode,
    pub fold_seed: u64,
    pub pca_components: Option<usize>,
    pub per_fold_accuracy: Vec<f64>,
    pub accuracy: f64,
    pub per_class_tpr: Vec<Option<f64>>,
    pub macro_tpr: f64,
    pub confusion: ConfusionMatrix,
}

pub fn cross_validate<L: Learner>(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    learner: &L,
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<CvReport> {
    cross_validate_probed(x, y, n_classes, learner, plan, options, &mut ())
}

pub fn cross_validate_probed<L: Learner>(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    learner: &L,
    plan: &FoldPlan,
    options: &CvOptions,
    probe: &mut dyn CvProbe,
) -> Result<CvReport> {
    if plan.assignment.len() != x.rows() || y.len() != x.rows() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: plan.assignment.len().min(y.len()) });
    }
    let mut confusion = ConfusionMatrix::new(n_classes);
    let mut per_fold_accuracy = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let test_rows = plan.test_rows(fold);
        if test_rows.is_empty() {
            continue;
        }
        let train_rows = plan.train_rows(fold);
        let wrap = |e: Error| Error::Fold { fold, source: Box::new(e) };

        let train_x = x.select_rows(&train_rows);
        let train_y: Vec<usize> = train_rows.iter().map(|&r| y[r]).collect();
        probe.fitted(fold, &train_rows);
        let pre = Preprocessor::fit(&train_x, learner.wants_standardized(), options.pca_components).map_err(wrap)?;
        let model = learner
            .fit(&pre.transform(&train_x).map_err(wrap)?, &train_y, n_classes, options.seed.wrapping_add(fold as u64))
            .map_err(wrap)?;

        probe.predicted(fold, &test_rows);
        let test_x = pre.transform(&x.select_rows(&test_rows)).map_err(wrap)?;
        let mut correct = 0usize;
        for (i, &r) in test_rows.iter().enumerate() {
            let predicted = learner.predict(&model, test_x.row(i)).map_err(wrap)?;
            confusion.record(y[r], predicted);
            correct += usize::from(predicted == y[r]);
        }
        per_fold_accuracy.push(correct as f64 / test_rows.len() as f64);
    }
    let m = metrics(&confusion)?;
    Ok(CvReport {
        classifier: learner.spec(),
        k: plan.k,
        fold_mode: plan.mode,
        fold_seed: plan.seed,
        pca_components: options.pca_components,
        per_fold_accuracy,
        accuracy: m.accuracy,
        per_class_tpr: m.per_class_tpr,
        macro_tpr: m.macro_tpr,
        confusion,
    })
}
