//! Six classifiers behind one train / predict contract.
//!
//! | kind | model | defaults |
//! |------|-------|----------|
//! | J48  | pruned C4.5 tree | confidence 0.25, 2 per leaf |
//! | MLP  | one sigmoid hidden layer | η 0.3, momentum 0.2, 500 epochs |
//! | SVM  | SMO, `(u·v + 1)³`, one-vs-one | C 1, tol 1e-3 |
//! | RF   | 100 random trees | `⌊log₂ d⌋ + 1` features per split |
//! | KNN  | Euclidean majority vote | k 1 |
//! | LR   | one-vs-all logistic | l2 1e-8, η 0.01, 2000 epochs |
//!
//! Predicted labels are the argmax of the class scores with ties going to
//! the lowest class index.

pub mod forest;
pub mod j48;
pub mod knn;
pub mod logistic;
pub mod mlp;
pub mod svm;
pub mod tree;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{argmax, Matrix};
use crate::{Error, Result};

pub use forest::RandomForest;
pub use j48::J48;
pub use knn::Knn;
pub use logistic::LogisticOvA;
pub use mlp::Mlp;
pub use svm::Svm;

/// The six classifiers, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    J48,
    Mlp,
    Svm,
    RandomForest,
    Knn,
    Logistic,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::J48,
        ClassifierKind::Mlp,
        ClassifierKind::Svm,
        ClassifierKind::RandomForest,
        ClassifierKind::Knn,
        ClassifierKind::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::J48 => "J48",
            ClassifierKind::Mlp => "MLP",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Logistic => "LR",
        }
    }

    pub fn default_spec(self) -> ClassifierSpec {
        match self {
            ClassifierKind::J48 => ClassifierSpec::J48 { confidence: 0.25, min_leaf: 2 },
            ClassifierKind::Mlp => {
                ClassifierSpec::Mlp { learning_rate: 0.3, momentum: 0.2, epochs: 500, hidden_units: None }
            }
            ClassifierKind::Svm => ClassifierSpec::Svm { kernel_degree: 3, c: 1.0, tol: 1e-3 },
            ClassifierKind::RandomForest => ClassifierSpec::RandomForest { trees: 100, features_per_split: None },
            ClassifierKind::Knn => ClassifierSpec::Knn { k: 1 },
            ClassifierKind::Logistic => ClassifierSpec::Logistic { l2: 1e-8, learning_rate: 0.01, epochs: 2000 },
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "j48" => Ok(Self::J48),
            "mlp" => Ok(Self::Mlp),
            "svm" | "smo" => Ok(Self::Svm),
            "rf" | "randomforest" | "random-forest" => Ok(Self::RandomForest),
            "knn" => Ok(Self::Knn),
            "lr" | "logistic" => Ok(Self::Logistic),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown classifier {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ClassifierSpec {
    J48 { confidence: f64, min_leaf: usize },
    Mlp { learning_rate: f64, momentum: f64, epochs: usize, hidden_units: Option<usize> },
    Svm { kernel_degree: u32, c: f64, tol: f64 },
    RandomForest { trees: usize, features_per_split: Option<usize> },
    Knn { k: usize },
    Logistic { l2: f64, learning_rate: f64, epochs: usize },
}

impl ClassifierSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::J48 { .. } => ClassifierKind::J48,
            ClassifierSpec::Mlp { .. } => ClassifierKind::Mlp,
            ClassifierSpec::Svm { .. } => ClassifierKind::Svm,
            ClassifierSpec::RandomForest { .. } => ClassifierKind::RandomForest,
            ClassifierSpec::Knn { .. } => ClassifierKind::Knn,
            ClassifierSpec::Logistic { .. } => ClassifierKind::Logistic,
        }
    }

    /// Whether inputs should be z-scored first. Trees are scale-invariant
    /// and take raw features.
    pub fn wants_standardized(&self) -> bool {
        !matches!(self, ClassifierSpec::J48 { .. } | ClassifierSpec::RandomForest { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(alloc::format!("{}: {msg}", self.kind())));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            ClassifierSpec::J48 { confidence, min_leaf } => {
                if !(confidence > 0.0 && confidence <= 0.5) {
                    return bad("confidence must be in (0, 0.5]");
                }
                if min_leaf == 0 {
                    return bad("min_leaf must be at least 1");
                }
            }
            ClassifierSpec::Mlp { learning_rate, momentum, epochs, hidden_units } => {
                if !pos(learning_rate) || !(0.0..1.0).contains(&momentum) || epochs == 0 || hidden_units == Some(0) {
                    return bad("needs learning_rate > 0, momentum in [0, 1), epochs ≥ 1, hidden_units ≥ 1");
                }
            }
            ClassifierSpec::Svm { kernel_degree, c, tol } => {
                if kernel_degree == 0 || !pos(c) || !pos(tol) {
                    return bad("needs kernel_degree ≥ 1, C > 0, tol > 0");
                }
            }
            ClassifierSpec::RandomForest { trees, features_per_split } => {
                if trees == 0 || features_per_split == Some(0) {
                    return bad("needs at least one tree and one feature per split");
                }
            }
            ClassifierSpec::Knn { k } => {
                if k == 0 {
                    return bad("k must be at least 1");
                }
            }
            ClassifierSpec::Logistic { l2, learning_rate, epochs } => {
                if !(l2.is_finite() && l2 >= 0.0) || !pos(learning_rate) || epochs == 0 {
                    return bad("needs l2 ≥ 0, learning_rate > 0, epochs ≥ 1");
                }
            }
        }
        Ok(())
    }
}

/// Validated training data with labels in `0..n_classes`.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a> {
    pub x: &'a Matrix,
    pub y: &'a [usize],
    pub n_classes: usize,
}

impl<'a> TrainingSet<'a> {
    pub fn new(x: &'a Matrix, y: &'a [usize], n_classes: usize) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.rows(), got: y.len() });
        }
        if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
            return Err(Error::LabelOutOfRange { label, n_classes });
        }
        if let Some((row, col)) = x.find_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        let set = Self { x, y, n_classes };
        let present = set.present_classes().len();
        if present < 2 {
            return Err(Error::SingleClass);
        }
        if x.rows() < 2 * present {
            return Err(Error::TooFewRows { need: 2 * present, got: x.rows() });
        }
        Ok(set)
    }

    /// Classes with at least one row, ascending.
    pub fn present_classes(&self) -> Vec<usize> {
        let mut seen = alloc::vec![false; self.n_classes];
        for &l in self.y {
            seen[l] = true;
        }
        (0..self.n_classes).filter(|&c| seen[c]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model")]
pub enum TrainedClassifier {
    J48(J48),
    Mlp(Mlp),
    Svm(Svm),
    RandomForest(RandomForest),
    Knn(Knn),
    Logistic(LogisticOvA),
}

pub fn train(spec: &ClassifierSpec, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<TrainedClassifier> {
    spec.validate()?;
    let data = TrainingSet::new(x, y, n_classes)?;
    Ok(match *spec {
        ClassifierSpec::J48 { confidence, min_leaf } => TrainedClassifier::J48(J48::train(&data, confidence, min_leaf)),
        ClassifierSpec::Mlp { learning_rate, momentum, epochs, hidden_units } => {
            let params = mlp::MlpParams { learning_rate, momentum, epochs, hidden_units };
            TrainedClassifier::Mlp(mlp::train_with_history(&data, &params, seed).0)
        }
        ClassifierSpec::Svm { kernel_degree, c, tol } => {
            TrainedClassifier::Svm(Svm::train(&data, kernel_degree, c, tol))
        }
        ClassifierSpec::RandomForest { trees, features_per_split } => {
            TrainedClassifier::RandomForest(RandomForest::train(&data, trees, features_per_split, seed))
        }
        ClassifierSpec::Knn { k } => TrainedClassifier::Knn(Knn::train(&data, k)),
        ClassifierSpec::Logistic { l2, learning_rate, epochs } => {
            TrainedClassifier::Logistic(LogisticOvA::train(&data, l2, learning_rate, epochs))
        }
    })
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedClassifier::J48(_) => ClassifierKind::J48,
            TrainedClassifier::Mlp(_) => ClassifierKind::Mlp,
            TrainedClassifier::Svm(_) => ClassifierKind::Svm,
            TrainedClassifier::RandomForest(_) => ClassifierKind::RandomForest,
            TrainedClassifier::Knn(_) => ClassifierKind::Knn,
            TrainedClassifier::Logistic(_) => ClassifierKind::Logistic,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedClassifier::J48(m) => m.n_features,
            TrainedClassifier::Mlp(m) => m.n_inputs(),
            TrainedClassifier::Svm(m) => m.n_features,
            TrainedClassifier::RandomForest(m) => m.n_features,
            TrainedClassifier::Knn(m) => m.points.cols(),
            TrainedClassifier::Logistic(m) => m.n_features,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedClassifier::J48(m) => m.n_classes,
            TrainedClassifier::Mlp(m) => m.n_outputs(),
            TrainedClassifier::Svm(m) => m.n_classes,
            TrainedClassifier::RandomForest(m) => m.n_classes,
            TrainedClassifier::Knn(m) => m.n_classes,
            TrainedClassifier::Logistic(m) => m.learners.len(),
        }
    }

    pub fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: x.len() });
        }
        Ok(match self {
            TrainedClassifier::J48(m) => m.scores(x),
            TrainedClassifier::Mlp(m) => m.forward(x).output,
            TrainedClassifier::Svm(m) => m.scores(x),
            TrainedClassifier::RandomForest(m) => m.scores(x),
            TrainedClassifier::Knn(m) => m.scores(x),
            TrainedClassifier::Logistic(m) => m.scores(x),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_scores(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_set_validation() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        assert_eq!(TrainingSet::new(&x, &[0, 0, 0, 0], 2).unwrap_err(), Error::SingleClass);
        assert!(matches!(TrainingSet::new(&x, &[0, 1, 0], 2), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(TrainingSet::new(&x, &[0, 1, 2, 0], 2), Err(Error::LabelOutOfRange { .. })));
        let mut bad = x.clone();
        bad[(2, 0)] = f64::NAN;
        assert_eq!(TrainingSet::new(&bad, &[0, 1, 0, 1], 2).unwrap_err(), Error::NonFinite { row: 2, col: 0 });
        let three = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(matches!(TrainingSet::new(&three, &[0, 1, 1], 2), Err(Error::TooFewRows { .. })));
    }

    #[test]
    fn spec_validation() {
        assert!(ClassifierSpec::Knn { k: 0 }.validate().is_err());
        assert!(ClassifierSpec::J48 { confidence: 0.7, min_leaf: 2 }.validate().is_err());
        for kind in ClassifierKind::ALL {
            assert!(kind.default_spec().validate().is_ok());
            assert_eq!(kind.default_spec().kind(), kind);
            assert_eq!(kind.name().parse::<ClassifierKind>().unwrap(), kind);
        }
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]]).unwrap();
        let m = train(&ClassifierSpec::Knn { k: 1 }, &x, &[0, 0, 1, 1], 2, 0).unwrap();
        assert!(m.predict(&[1.0]).is_err());
        assert_eq!(m.predict(&[4.0, 4.0]).unwrap(), 1);
    }
}
