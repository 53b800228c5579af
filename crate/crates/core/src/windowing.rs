//! Box and Gaussian sliding windows with 50% overlap, and the zero-padded
//! DFT used to compare their frequency responses.
//!
//! A window of `L` samples is placed at starts `0, hop, 2·hop, …` with
//! `hop = ⌊L/2⌋`; samples past the last full window are dropped. Each
//! segment is the raw slice multiplied elementwise by the window weights.
//!
//! Gaussian weights are `1/(σ√2π)·exp(−(n−c)²/2σ²)` with `σ` in samples,
//! centred on the middle sample `c` of a support of `support_sigmas·σ`
//! samples (forced odd).

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shortest window for which every segment statistic is defined.
pub const MIN_WINDOW_SAMPLES: usize = 4;
pub const OVERLAP_FRACTION: f64 = 0.5;
pub const DEFAULT_GAUSSIAN_SUPPORT_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowKind {
    Box { width_s: f64 },
    Gaussian { sigma_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    /// Total Gaussian support as a multiple of σ. Ignored for Box windows.
    pub support_sigmas: f64,
}

impl WindowSpec {
    pub fn boxcar(width_s: f64) -> Self {
        Self { kind: WindowKind::Box { width_s }, support_sigmas: DEFAULT_GAUSSIAN_SUPPORT_SIGMAS }
    }

    pub fn gaussian(sigma_s: f64) -> Self {
        Self { kind: WindowKind::Gaussian { sigma_s }, support_sigmas: DEFAULT_GAUSSIAN_SUPPORT_SIGMAS }
    }

    /// The width (Box) or σ (Gaussian) in seconds.
    pub fn parameter_s(&self) -> f64 {
        match self.kind {
            WindowKind::Box { width_s } => width_s,
            WindowKind::Gaussian { sigma_s } => sigma_s,
        }
    }

    /// Window length in samples at `rate`, before the minimum-length check.
    pub fn sample_len(&self, rate: f64) -> Result<usize> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::NotPositive { what: "sample rate", value: rate });
        }
        match self.kind {
            WindowKind::Box { width_s } => {
                if !(width_s.is_finite() && width_s > 0.0) {
                    return Err(Error::NotPositive { what: "window width", value: width_s });
                }
                Ok((width_s * rate).round() as usize)
            }
            WindowKind::Gaussian { sigma_s } => {
                if !(sigma_s.is_finite() && sigma_s > 0.0) {
                    return Err(Error::NotPositive { what: "gaussian sigma", value: sigma_s });
                }
                if !(self.support_sigmas.is_finite() && self.support_sigmas > 0.0) {
                    return Err(Error::NotPositive { what: "gaussian support", value: self.support_sigmas });
                }
                let len = (self.support_sigmas * sigma_s * rate).round() as usize;
                Ok(if len.is_multiple_of(2) { len + 1 } else { len })
            }
        }
    }
}

pub fn window_weights(spec: &WindowSpec, rate: f64) -> Result<Vec<f64>> {
    let len = spec.sample_len(rate)?;
    if len < MIN_WINDOW_SAMPLES {
        return Err(Error::WindowTooShort { len, min: MIN_WINDOW_SAMPLES });
    }
    Ok(match spec.kind {
        WindowKind::Box { .. } => alloc::vec![1.0; len],
        WindowKind::Gaussian { sigma_s } => gaussian_weights(len, sigma_s * rate),
    })
}

fn gaussian_weights(len: usize, sigma: f64) -> Vec<f64> {
    let centre = (len - 1) as f64 / 2.0;
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    (0..len)
        .map(|n| {
            let d = n as f64 - centre;
            norm * (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub values: Vec<f64>,
}

/// Precomputed window weights and hop for repeated segmentation.
#[derive(Debug, Clone)]
pub struct Segmenter {
    weights: Vec<f64>,
    hop: usize,
}

impl Segmenter {
    pub fn new(spec: &WindowSpec, rate: f64) -> Result<Self> {
        Self::from_weights(window_weights(spec, rate)?)
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < MIN_WINDOW_SAMPLES {
            return Err(Error::WindowTooShort { len: weights.len(), min: MIN_WINDOW_SAMPLES });
        }
        let hop = weights.len() / 2;
        Ok(Self { weights, hop })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn window_len(&self) -> usize {
        self.weights.len()
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Number of full windows that fit in `signal_len` samples.
    pub fn count(&self, signal_len: usize) -> usize {
        if signal_len < self.window_len() {
            0
        } else {
            (signal_len - self.window_len()) / self.hop + 1
        }
    }

    pub fn starts(&self, signal_len: usize) -> impl Iterator<Item = usize> {
        let hop = self.hop;
        (0..self.count(signal_len)).map(move |k| k * hop)
    }

    /// Weighted copy of the window at `start`.
    pub fn apply_at(&self, signal: &[f64], start: usize) -> Vec<f64> {
        signal[start..start + self.window_len()].iter().zip(&self.weights).map(|(x, w)| x * w).collect()
    }

    pub fn segments(&self, signal: &[f64]) -> Result<Vec<Segment>> {
        if signal.len() < self.window_len() {
            return Err(Error::SignalTooShort { signal: signal.len(), window: self.window_len() });
        }
        Ok(self.starts(signal.len()).map(|start| Segment { start, values: self.apply_at(signal, start) }).collect())
    }
}

pub fn segment_signal(signal: &[f64], spec: &WindowSpec, rate: f64) -> Result<Vec<Segment>> {
    Segmenter::new(spec, rate)?.segments(signal)
}

/// One-sided magnitude response of a window, normalised to a 0 dB peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n_fft: usize,
    /// Cycles per sample, `0..=0.5`.
    pub frequencies: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    /// Full width of the main lobe at half power (−3.01 dB), cycles/sample.
    pub main_lobe_width: f64,
    /// Level of the first local maximum past the first null, if any.
    pub first_sidelobe_db: Option<f64>,
}

/// Floor applied to exact spectral zeros so every level is finite.
pub const DB_FLOOR: f64 = -400.0;

/// Default FFT size: the next power of two at or above `8·len`.
pub fn default_fft_len(window_len: usize) -> usize {
    (8 * window_len.max(1)).next_power_of_two()
}

pub fn window_spectrum(weights: &[f64], n_fft: usize) -> Result<SpectrumReport> {
    if weights.is_empty() || weights.iter().all(|&w| w == 0.0) {
        return Err(Error::ZeroWindow);
    }
    if n_fft < 8 * weights.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "n_fft {n_fft} must be at least 8 × window length {}",
            weights.len()
        )));
    }
    let magnitude = dft_magnitude(weights, n_fft);
    let peak = magnitude.iter().copied().fold(0.0, f64::max);
    let bins = magnitude.len();
    let frequencies: Vec<f64> = (0..bins).map(|k| k as f64 / n_fft as f64).collect();
    let magnitude_db: Vec<f64> =
        magnitude.iter().map(|&m| if m > 0.0 { (20.0 * (m / peak).log10()).max(DB_FLOOR) } else { DB_FLOOR }).collect();

    let half_power_db = -10.0 * 2.0_f64.log10();
    let main_lobe_width = match magnitude_db.iter().position(|&db| db < half_power_db) {
        None => 1.0,
        Some(0) => 0.0,
        Some(k) => {
            // Interpolate the crossing between bins k-1 and k.
            let (d0, d1) = (magnitude_db[k - 1], magnitude_db[k]);
            let t = (d0 - half_power_db) / (d0 - d1);
            2.0 * (frequencies[k - 1] + t * (frequencies[k] - frequencies[k - 1]))
        }
    };

    let first_sidelobe_db = {
        let mut k = 1;
        while k < bins && magnitude_db[k] <= magnitude_db[k - 1] {
            k += 1;
        }
        // k - 1 is the first local minimum; climb to the next maximum.
        if k >= bins {
            None
        } else {
            while k + 1 < bins && magnitude_db[k + 1] >= magnitude_db[k] {
                k += 1;
            }
            if k + 1 < bins {
                Some(magnitude_db[k])
            } else {
                None
            }
        }
    };

    Ok(SpectrumReport { n_fft, frequencies, magnitude_db, main_lobe_width, first_sidelobe_db })
}

/// `|Σ w[n]·e^{−2πikn/N}|` for `k = 0..=N/2`, via a cosine/sine table.
fn dft_magnitude(weights: &[f64], n_fft: usize) -> Vec<f64> {
    let table: Vec<(f64, f64)> = (0..n_fft)
        .map(|m| {
            let phase = 2.0 * PI * m as f64 / n_fft as f64;
            (phase.cos(), phase.sin())
        })
        .collect();
    (0..=n_fft / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            let mut idx = 0usize;
            for &w in weights {
                let (c, s) = table[idx];
                re += w * c;
                im -= w * s;
                idx += k;
                if idx >= n_fft {
                    idx -= n_fft;
                }
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn box_weights_are_ones() {
        let w = window_weights(&WindowSpec::boxcar(0.5), 180.0).unwrap();
        assert_eq!(w.len(), 90);
        assert!(w.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn gaussian_weights_shape() {
        let w = window_weights(&WindowSpec::gaussian(0.36), 180.0).unwrap();
        assert_eq!(w.len(), 389);
        let c = 194;
        for j in 0..=c {
            assert_eq!(w[c - j], w[c + j]);
        }
        let sigma = 0.36 * 180.0;
        let expected_ratio = ((c * c) as f64 / (2.0 * sigma * sigma)).exp();
        assert!((w[c] / w[0] - expected_ratio).abs() <= 1e-9 * expected_ratio);
        assert!((w[c] - 1.0 / (sigma * (2.0 * PI).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn even_gaussian_support_is_made_odd() {
        // 6 · 0.1 · 180 = 108 → 109
        assert_eq!(WindowSpec::gaussian(0.1).sample_len(180.0).unwrap(), 109);
    }

    #[test]
    fn too_short_windows_rejected() {
        assert_eq!(window_weights(&WindowSpec::boxcar(0.01), 180.0), Err(Error::WindowTooShort { len: 2, min: 4 }));
        assert!(window_weights(&WindowSpec::boxcar(-1.0), 180.0).is_err());
        assert!(window_weights(&WindowSpec::gaussian(0.0), 180.0).is_err());
    }

    #[test]
    fn segmentation_examples() {
        let signal: Vec<f64> = (0..1800).map(|i| i as f64).collect();
        let segs = segment_signal(&signal, &WindowSpec::boxcar(0.5), 180.0).unwrap();
        assert_eq!(segs.len(), 39);
        assert_eq!(segs[1].start, 45);
        for s in &segs {
            assert_eq!(s.values, &signal[s.start..s.start + 90]);
        }
        let exact = &signal[..90];
        let one = segment_signal(exact, &WindowSpec::boxcar(0.5), 180.0).unwrap();
        assert_eq!(one.len(), 1);
        assert!(matches!(
            segment_signal(&signal[..89], &WindowSpec::boxcar(0.5), 180.0),
            Err(Error::SignalTooShort { signal: 89, window: 90 })
        ));
    }

    #[test]
    fn gaussian_segments_are_weighted_slices() {
        let signal: Vec<f64> = (0..500).map(|i| (i as f64 * 0.1).sin()).collect();
        let spec = WindowSpec::gaussian(0.1);
        let seg = Segmenter::new(&spec, 180.0).unwrap();
        let segs = seg.segments(&signal).unwrap();
        for s in &segs {
            for (i, v) in s.values.iter().enumerate() {
                assert_eq!(*v, signal[s.start + i] * seg.weights()[i]);
            }
        }
    }

    #[test]
    fn box_first_sidelobe() {
        for len in [16, 31, 90, 211] {
            let r = window_spectrum(&vec![1.0; len], default_fft_len(len)).unwrap();
            let sl = r.first_sidelobe_db.unwrap();
            assert!((sl + 13.3).abs() <= 0.5, "len {len}: {sl}");
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let r = window_spectrum(&[1.0], 8).unwrap();
        assert!(r.magnitude_db.iter().all(|&db| db.abs() < 1e-12));
        assert_eq!(r.main_lobe_width, 1.0);
        assert_eq!(r.first_sidelobe_db, None);
    }

    #[test]
    fn wider_gaussian_has_narrower_main_lobe() {
        let len = 121;
        let narrow = gaussian_weights(len, len as f64 / 6.0);
        let wide = gaussian_weights(len, len as f64 / 3.0);
        let n = default_fft_len(len);
        let a = window_spectrum(&narrow, n).unwrap();
        let b = window_spectrum(&wide, n).unwrap();
        assert!(b.main_lobe_width < a.main_lobe_width);
    }

    #[test]
    fn spectrum_errors() {
        assert_eq!(window_spectrum(&[0.0; 8], 64), Err(Error::ZeroWindow));
        assert!(window_spectrum(&[1.0; 8], 32).is_err());
    }
}
