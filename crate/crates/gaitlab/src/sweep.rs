//! Window-parameter and PCA-component sweeps.
//!
//! Cells are independent jobs on the rayon pool; results are collected in
//! grid order, so reports do not depend on scheduling.

use gaitlab_core::classifiers::{ClassifierKind, ClassifierSpec};
use gaitlab_core::domain::{Task, TruncationSpec};
use gaitlab_core::eval::{cross_validate, make_folds, CvOptions, CvReport, FoldMode, DEFAULT_FOLDS};
use gaitlab_core::features::FeatureMatrix;
use gaitlab_core::windowing::WindowSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pipeline::Cohort;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WindowFamily {
    Box,
    Gaussian,
}

impl WindowFamily {
    pub fn spec(self, param_s: f64) -> WindowSpec {
        match self {
            WindowFamily::Box => WindowSpec::boxcar(param_s),
            WindowFamily::Gaussian => WindowSpec::gaussian(param_s),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowFamily::Box => "box",
            WindowFamily::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub task: Task,
    pub family: WindowFamily,
    /// Box width or Gaussian σ, seconds.
    pub values: Vec<f64>,
    pub classifiers: Vec<ClassifierKind>,
}

impl SweepGrid {
    /// Default grids: Box width or Gaussian σ, seconds, per task.
    pub fn default_for(task: Task, family: WindowFamily) -> Self {
        let values = match (family, task) {
            (WindowFamily::Box, Task::Bmi) => vec![0.17, 0.33, 0.50, 0.67, 0.83, 1.00, 1.17],
            (WindowFamily::Box, Task::Age) => vec![0.17, 0.33, 0.50, 0.67, 0.83, 1.00, 1.11],
            (WindowFamily::Gaussian, Task::Bmi) => vec![0.06, 0.14, 0.22, 0.31, 0.36, 0.44, 0.56],
            (WindowFamily::Gaussian, Task::Age) => vec![0.08, 0.17, 0.25, 0.33, 0.42, 0.50, 0.56],
        };
        Self { task, family, values, classifiers: ClassifierKind::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Format("a sweep needs at least one value and one classifier".into()));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Format(format!("window parameters must be positive: {:?}", self.values)));
        }
        if self.values.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Format(format!("window parameters must be strictly increasing: {:?}", self.values)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub folds: usize,
    pub fold_mode: FoldMode,
    /// Seeds the fold assignment and every classifier.
    pub seed: u64,
    pub truncation: TruncationSpec,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self { folds: DEFAULT_FOLDS, fold_mode: FoldMode::Segment, seed: 0, truncation: TruncationSpec::default() }
    }
}

/// Cross-validates one classifier on a feature matrix.
pub fn evaluate_matrix(
    m: &FeatureMatrix,
    spec: &ClassifierSpec,
    pca_components: Option<usize>,
    settings: &CvSettings,
) -> Result<CvReport> {
    let task = m.task().ok_or_else(|| Error::Format("feature matrix is empty".into()))?;
    let y = m.labels();
    let ids = m.subject_ids();
    let groups = (settings.fold_mode == FoldMode::SubjectGrouped).then_some(ids.as_slice());
    let plan = make_folds(&y, groups, settings.folds, settings.fold_mode, settings.seed)?;
    let options = CvOptions { pca_components, seed: settings.seed };
    Ok(cross_validate(&m.features(), &y, task.n_classes(), spec, &plan, &options)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param_s: f64,
    pub classifier: String,
    pub accuracy: Option<f64>,
    pub macro_tpr: Option<f64>,
    /// Set instead of the scores when the cell could not be evaluated.
    pub error: Option<String>,
    /// Highest accuracy for this classifier across the grid.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub task: Task,
    pub window: WindowFamily,
    pub classifiers: Vec<String>,
    pub rows: Vec<SweepRow>,
}

pub fn run_window_sweep(cohort: &Cohort, grid: &SweepGrid, settings: &CvSettings) -> Result<SweepReport> {
    grid.validate()?;
    let matrices: Vec<std::result::Result<FeatureMatrix, String>> = grid
        .values
        .par_iter()
        .map(|&v| cohort.features(grid.task, &grid.family.spec(v), &settings.truncation).map_err(|e| e.to_string()))
        .collect();
    let cells: Vec<(usize, ClassifierKind)> =
        (0..grid.values.len()).flat_map(|i| grid.classifiers.iter().map(move |&k| (i, k))).collect();
    let mut rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(i, kind)| {
            let outcome = match &matrices[i] {
                Ok(m) => evaluate_matrix(m, &kind.default_spec(), None, settings).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            let (accuracy, macro_tpr, error) = match outcome {
                Ok(r) => (Some(r.accuracy), Some(r.macro_tpr), None),
                Err(e) => (None, None, Some(e)),
            };
            SweepRow {
                param_s: grid.values[i],
                classifier: kind.name().into(),
                accuracy,
                macro_tpr,
                error,
                best: false,
            }
        })
        .collect();
    for kind in &grid.classifiers {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            if r.classifier == kind.name() {
                if let Some(a) = r.accuracy {
                    if best.is_none_or(|(_, b)| a > b) {
                        best = Some((i, a));
                    }
                }
            }
        }
        if let Some((i, _)) = best {
            rows[i].best = true;
        }
    }
    Ok(SweepReport {
        task: grid.task,
        window: grid.family,
        classifiers: grid.classifiers.iter().map(|k| k.name().to_owned()).collect(),
        rows,
    })
}

pub(crate) fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "ERR".to_owned(), |a| format!("{:.2}", a * 100.0))
}

impl SweepReport {
    /// `task,param_s,classifier,accuracy_pct,macro_tpr_pct`; failed cells read `ERR`.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("task,param_s,classifier,accuracy_pct,macro_tpr_pct\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.task,
                r.param_s,
                r.classifier,
                pct(r.accuracy),
                pct(r.macro_tpr)
            ));
        }
        out
    }

    /// One row per parameter, one accuracy column per classifier.
    pub fn to_table_csv(&self) -> String {
        let mut out = format!("param_s,{}\n", self.classifiers.join(","));
        let mut params: Vec<f64> = self.rows.iter().map(|r| r.param_s).collect();
        params.dedup();
        for p in params {
            out.push_str(&p.to_string());
            for k in &self.classifiers {
                let acc = self.rows.iter().find(|r| r.param_s == p && &r.classifier == k).and_then(|r| r.accuracy);
                out.push(',');
                out.push_str(&pct(acc));
            }
            out.push('\n');
        }
        out
    }

    pub fn accuracy(&self, param_s: f64, classifier: ClassifierKind) -> Option<f64> {
        self.rows.iter().find(|r| r.param_s == param_s && r.classifier == classifier.name()).and_then(|r| r.accuracy)
    }
}

/// Plateau tolerance for component curves: one percentage point.
pub const PLATEAU_EPSILON: f64 = 0.01;

/// First component count whose accuracy is within `eps` of the curve maximum.
pub fn plateau(points: &[(usize, f64)], eps: f64) -> Option<usize> {
    let max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    points.iter().find(|p| p.1 >= max - eps).map(|p| p.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_components: usize,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaCurve {
    pub classifier: String,
    pub points: Vec<CurvePoint>,
    /// Accuracy on all 84 standardized features without PCA.
    pub baseline_accuracy: Option<f64>,
    pub plateau: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaSweepReport {
    pub task: Task,
    pub window: WindowSpec,
    pub curves: Vec<PcaCurve>,
}

pub fn run_pca_sweep(
    cohort: &Cohort,
    task: Task,
    window: &WindowSpec,
    components: &[usize],
    classifiers: &[ClassifierKind],
    settings: &CvSettings,
) -> Result<PcaSweepReport> {
    if components.is_empty() || classifiers.is_empty() {
        return Err(Error::Format("a component sweep needs at least one component count and one classifier".into()));
    }
    let m = cohort.features(task, window, &settings.truncation)?;
    // `None` is the no-PCA baseline.
    let counts: Vec<Option<usize>> = std::iter::once(None).chain(components.iter().map(|&n| Some(n))).collect();
    let cells: Vec<(ClassifierKind, Option<usize>)> =
        classifiers.iter().flat_map(|&k| counts.iter().map(move |&n| (k, n))).collect();
    let results: Vec<std::result::Result<f64, String>> = cells
        .par_iter()
        .map(|&(k, n)| {
            evaluate_matrix(&m, &k.default_spec(), n, settings).map(|r| r.accuracy).map_err(|e| e.to_string())
        })
        .collect();
    let curves = classifiers
        .iter()
        .enumerate()
        .map(|(ci, k)| {
            let chunk = &results[ci * counts.len()..(ci + 1) * counts.len()];
            let points: Vec<CurvePoint> = components
                .iter()
                .zip(&chunk[1..])
                .map(|(&n, r)| CurvePoint {
                    n_components: n,
                    accuracy: r.as_ref().ok().copied(),
                    error: r.as_ref().err().cloned(),
                })
                .collect();
            let ok: Vec<(usize, f64)> = points.iter().filter_map(|p| p.accuracy.map(|a| (p.n_components, a))).collect();
            PcaCurve {
                classifier: k.name().into(),
                baseline_accuracy: chunk[0].as_ref().ok().copied(),
                plateau: plateau(&ok, PLATEAU_EPSILON),
                points,
            }
        })
        .collect();
    Ok(PcaSweepReport { task, window: *window, curves })
}

impl PcaSweepReport {
    /// `classifier,n_components,accuracy_pct`.
    pub fn to_curve_csv(&self) -> String {
        let mut out = String::from("classifier,n_components,accuracy_pct\n");
        for c in &self.curves {
            for p in &c.points {
                out.push_str(&format!("{},{},{}\n", c.classifier, p.n_components, pct(p.accuracy)));
            }
        }
        out
    }
}
