//! JSON and CSV renderings of evaluation results, spectra and models.

use gaitlab_core::classifiers::TrainedClassifier;
use gaitlab_core::domain::Task;
use gaitlab_core::eval::{ConfusionMatrix, CvReport, Preprocessor};
use gaitlab_core::windowing::{SpectrumReport, WindowSpec};
use serde::{Deserialize, Serialize};

use crate::sweep::CvSettings;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub task: Task,
    pub window: WindowSpec,
    pub settings: CvSettings,
    pub class_names: Vec<String>,
    pub rows: usize,
    pub cv: CvReport,
}

/// Rows are true classes, columns predicted classes.
pub fn confusion_csv(c: &ConfusionMatrix, class_names: &[&str]) -> String {
    let mut out = format!("true\\predicted,{}\n", class_names.join(","));
    for (name, row) in class_names.iter().zip(&c.counts) {
        out.push_str(name);
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// `freq,mag_db` with frequency in cycles per sample.
pub fn spectrum_csv(s: &SpectrumReport) -> String {
    let mut out = String::from("freq,mag_db\n");
    for (f, m) in s.frequencies.iter().zip(&s.magnitude_db) {
        out.push_str(&format!("{f},{m}\n"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub window: WindowSpec,
    pub sample_rate_hz: f64,
    pub window_len: usize,
    pub n_fft: usize,
    /// Cycles per sample.
    pub main_lobe_width: f64,
    pub main_lobe_width_hz: f64,
    pub first_sidelobe_db: Option<f64>,
}

/// A trained classifier with the preprocessing it expects, as saved to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub task: Task,
    pub window: WindowSpec,
    pub preprocessor: Preprocessor,
    pub model: TrainedClassifier,
}

impl SavedModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: SavedModel = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}
