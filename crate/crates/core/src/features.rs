//! The fourteen per-segment statistics, the 84-column feature matrix and
//! z-score standardization.
//!
//! Column order is frozen: channel-major over `ax, ay, az, gx, gy, gz`, and
//! within a channel the order of [`FEATURE_NAMES`].

use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::domain::{Channel, Label, SensorRecording, Task, CHANNEL_COUNT};
use crate::linalg::Matrix;
use crate::windowing::{Segmenter, WindowSpec, MIN_WINDOW_SAMPLES};
use crate::{Error, Result};

pub const FEATURES_PER_CHANNEL: usize = 14;
pub const FEATURE_COUNT: usize = CHANNEL_COUNT * FEATURES_PER_CHANNEL;

pub const FEATURE_NAMES: [&str; FEATURES_PER_CHANNEL] = [
    "mean",
    "std_dev",
    "variance",
    "min",
    "max",
    "jitter",
    "mean_crossing_rate",
    "autocorr_mean",
    "autocorr_sd",
    "autocov_mean",
    "autocov_sd",
    "skewness",
    "kurtosis",
    "rmse",
];

/// `"ax.mean"`, `"ax.std_dev"`, … `"gz.rmse"`.
pub fn feature_column_names() -> Vec<String> {
    Channel::ALL.iter().flat_map(|c| FEATURE_NAMES.iter().map(move |f| alloc::format!("{}.{}", c.name(), f))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector14 {
    pub mean: f64,
    pub std_dev: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub jitter: f64,
    pub mean_crossing_rate: f64,
    pub autocorr_mean: f64,
    pub autocorr_sd: f64,
    pub autocov_mean: f64,
    pub autocov_sd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub rmse: f64,
    /// Zero spread: skewness and kurtosis were set to 0.
    pub degenerate: bool,
}

impl FeatureVector14 {
    pub fn to_array(&self) -> [f64; FEATURES_PER_CHANNEL] {
        [
            self.mean,
            self.std_dev,
            self.variance,
            self.min,
            self.max,
            self.jitter,
            self.mean_crossing_rate,
            self.autocorr_mean,
            self.autocorr_sd,
            self.autocov_mean,
            self.autocov_sd,
            self.skewness,
            self.kurtosis,
            self.rmse,
        ]
    }
}

/// Mean and Bessel-corrected standard deviation.
fn mean_and_sample_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn segment_features(x: &[f64]) -> Result<FeatureVector14> {
    let len = x.len();
    if len < MIN_WINDOW_SAMPLES {
        return Err(Error::SegmentTooShort(len));
    }
    let n = len as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (min, max) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / n;
    let std_dev = variance.sqrt();
    let rmse = (m2 / n).sqrt();

    let scale = min.abs().max(max.abs());
    let degenerate = scale == 0.0 || std_dev <= 1e-13 * scale;
    let (skewness, kurtosis) = if degenerate {
        (0.0, 0.0)
    } else {
        let s3 = std_dev * std_dev * std_dev;
        (n / ((n - 1.0) * (n - 2.0)) * (m3 / s3), m4 / (n * s3 * std_dev))
    };

    let jitter = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1.0);
    let crossings = x.windows(2).filter(|w| (w[1] > mean) != (w[0] > mean)).count();
    let mean_crossing_rate = crossings as f64 / n;

    // Lags 1..len-1. The autocorrelation denominator runs over the same
    // leading samples as the numerator: prefix[len - k] = Σ_{i < len-k} x[i]².
    let mut prefix_sq = Vec::with_capacity(len + 1);
    prefix_sq.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v * v;
        prefix_sq.push(acc);
    }
    let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let mut autocorr = Vec::with_capacity(len - 1);
    let mut autocov = Vec::with_capacity(len - 1);
    for k in 1..len {
        let head = len - k;
        let num: f64 = x[..head].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
        let den = prefix_sq[head];
        autocorr.push(if den == 0.0 { 0.0 } else { num / den });
        autocov.push(centred[..head].iter().zip(&centred[k..]).map(|(a, b)| a * b).sum());
    }
    let (autocorr_mean, autocorr_sd) = mean_and_sample_sd(&autocorr);
    let (autocov_mean, autocov_sd) = mean_and_sample_sd(&autocov);

    Ok(FeatureVector14 {
        mean,
        std_dev,
        variance,
        min,
        max,
        jitter,
        mean_crossing_rate,
        autocorr_mean,
        autocorr_sd,
        autocov_mean,
        autocov_sd,
        skewness,
        kurtosis,
        rmse,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub features: Vec<f64>,
    pub label: Label,
    pub subject_id: String,
    /// At least one channel segment had zero spread.
    #[serde(default)]
    pub degenerate: bool,
}

/// Labelled 84-column rows, all drawn from a single task.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<FeatureRow>) -> Result<Self> {
        let mut m = Self::new();
        for r in rows {
            m.push(r)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, row: FeatureRow) -> Result<()> {
        if row.features.len() != FEATURE_COUNT {
            return Err(Error::DimensionMismatch { expected: FEATURE_COUNT, got: row.features.len() });
        }
        if let Some(task) = self.task() {
            if row.label.task() != task {
                return Err(Error::InvalidParameter(alloc::format!(
                    "row labelled for the {} task added to a {} matrix",
                    row.label.task(),
                    task
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: FeatureMatrix) -> Result<()> {
        for r in other.rows {
            self.push(r)?;
        }
        Ok(())
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn task(&self) -> Option<Task> {
        self.rows.first().map(|r| r.label.task())
    }

    pub fn features(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.rows.len() * FEATURE_COUNT);
        for r in &self.rows {
            data.extend_from_slice(&r.features);
        }
        Matrix::from_vec(self.rows.len(), FEATURE_COUNT, data).expect("rows are validated on push")
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label.index()).collect()
    }

    pub fn subject_ids(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.subject_id.as_str()).collect()
    }
}

/// One row per aligned window position; every channel is cut at the same
/// start indices.
pub fn assemble_features(rec: &SensorRecording, spec: &WindowSpec, label: Label) -> Result<FeatureMatrix> {
    let segmenter = Segmenter::new(spec, rec.sample_rate())?;
    assemble_with(rec, &segmenter, label)
}

pub fn assemble_with(rec: &SensorRecording, segmenter: &Segmenter, label: Label) -> Result<FeatureMatrix> {
    if rec.len() < segmenter.window_len() {
        return Err(Error::SignalTooShort { signal: rec.len(), window: segmenter.window_len() });
    }
    let mut rows = Vec::with_capacity(segmenter.count(rec.len()));
    for start in segmenter.starts(rec.len()) {
        let mut features = Vec::with_capacity(FEATURE_COUNT);
        let mut degenerate = false;
        for channel in Channel::ALL {
            let f = segment_features(&segmenter.apply_at(rec.channel(channel), start))?;
            degenerate |= f.degenerate;
            features.extend_from_slice(&f.to_array());
        }
        rows.push(FeatureRow { features, label, subject_id: String::from(rec.subject_id()), degenerate });
    }
    Ok(FeatureMatrix { rows })
}

/// Column means and sample standard deviations of a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    /// Positive; 1 for constant columns.
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() < 2 {
            return Err(Error::TooFewRows { need: 2, got: x.rows() });
        }
        let n = x.rows() as f64;
        let mut means = alloc::vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut ss = alloc::vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for ((s, v), m) in ss.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let scales = ss
            .iter()
            .zip(&means)
            .map(|(s, m)| {
                let sd = (s / (n - 1.0)).sqrt();
                if sd > 1e-12 * m.abs().max(f64::MIN_POSITIVE) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { means, scales })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.means).zip(&self.scales) {
            *o = (v - m) / s;
        }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.cols() });
        }
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            self.apply_row(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }

    pub fn invert(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.cols() });
        }
        let mut out = z.clone();
        for i in 0..out.rows() {
            for ((o, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.scales) {
                *o = *o * s + m;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AgeCategory, BmiCategory};
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn basic_moments() {
        let f = segment_features(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        assert_eq!((f.mean, f.min, f.max), (2.0, 1.0, 3.0));
        assert!(close(f.variance, 0.5));
        assert!(close(f.std_dev * f.std_dev, f.variance));
        assert_eq!(f.rmse, f.std_dev);
    }

    #[test]
    fn constant_segment_is_degenerate() {
        let f = segment_features(&[2.5; 4]).unwrap();
        assert!(f.degenerate);
        assert_eq!((f.std_dev, f.jitter, f.mean_crossing_rate), (0.0, 0.0, 0.0));
        assert_eq!((f.skewness, f.kurtosis), (0.0, 0.0));
        assert_eq!(f.autocorr_mean, 1.0);
        assert_eq!(f.autocorr_sd, 0.0);
        let z = segment_features(&[0.0; 6]).unwrap();
        assert_eq!(z.autocorr_mean, 0.0);
        assert!(z.degenerate);
    }

    #[test]
    fn alternating_segment() {
        let f = segment_features(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(f.mean, 0.0);
        assert_eq!(f.mean_crossing_rate, 0.75);
        assert_eq!(f.jitter, 2.0);
    }

    #[test]
    fn short_segment_rejected() {
        assert_eq!(segment_features(&[1.0, 2.0, 3.0]), Err(Error::SegmentTooShort(3)));
    }

    #[test]
    fn column_names() {
        let names = feature_column_names();
        assert_eq!(names.len(), 84);
        assert_eq!(names[0], "ax.mean");
        assert_eq!(names[14 + 12], "ay.kurtosis");
        assert_eq!(names[83], "gz.rmse");
    }

    fn ramp_recording(len: usize) -> SensorRecording {
        let chans: [Vec<f64>; 6] =
            core::array::from_fn(|c| (0..len).map(|i| ((i * (c + 1)) as f64 * 0.05).sin() + c as f64).collect());
        SensorRecording::new("s07", 180.0, chans).unwrap()
    }

    #[test]
    fn assemble_rows_and_ordering() {
        let rec = ramp_recording(1800);
        let label = Label::Age(AgeCategory::Adult);
        let m = assemble_features(&rec, &WindowSpec::boxcar(0.5), label).unwrap();
        assert_eq!(m.len(), 39);
        assert!(m.rows().iter().all(|r| r.features.len() == 84 && r.subject_id == "s07" && r.label == label));

        let mut chans = rec.channels().clone();
        chans.swap(0, 4);
        let swapped = SensorRecording::new("s07", 180.0, chans).unwrap();
        let s = assemble_features(&swapped, &WindowSpec::boxcar(0.5), label).unwrap();
        for (a, b) in m.rows().iter().zip(s.rows()) {
            assert_eq!(a.features[0..14], b.features[56..70]);
            assert_eq!(a.features[56..70], b.features[0..14]);
            assert_eq!(a.features[14..56], b.features[14..56]);
        }

        let short = ramp_recording(50);
        assert!(assemble_features(&short, &WindowSpec::boxcar(0.5), label).is_err());
    }

    #[test]
    fn matrix_rejects_mixed_tasks() {
        let row = |label| FeatureRow { features: vec![0.0; 84], label, subject_id: "a".into(), degenerate: false };
        let mut m = FeatureMatrix::new();
        m.push(row(Label::Bmi(BmiCategory::Normal))).unwrap();
        assert!(m.push(row(Label::Age(AgeCategory::Aged))).is_err());
        assert!(m.push(FeatureRow { features: vec![0.0; 83], ..row(Label::Bmi(BmiCategory::Normal)) }).is_err());
    }

    #[test]
    fn standardization_examples() {
        let x = Matrix::from_rows(&[[1.0, 4.0], [3.0, 4.0]]).unwrap();
        let s = Standardization::fit(&x).unwrap();
        let z = s.apply(&x).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((z[(0, 0)] + r).abs() < 1e-12 && (z[(1, 0)] - r).abs() < 1e-12);
        assert_eq!((z[(0, 1)], z[(1, 1)]), (0.0, 0.0));
        assert_eq!(s.scales[1], 1.0);
        let back = s.invert(&z).unwrap();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(Standardization::fit(&Matrix::from_rows(&[[1.0]]).unwrap()).is_err());
    }
}
