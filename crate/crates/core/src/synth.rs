//! Synthetic walking cohorts with class-dependent gait structure.
//!
//! Each channel is a three-harmonic sum at the subject's step frequency,
//! plus a constant bias (gravity on `az`) and white Gaussian noise. Cadence
//! and amplitude vary from stride to stride. Step
//! frequency falls with age and BMI, amplitude falls with BMI, gyro
//! amplitude also falls with age and the harmonic mix shifts with age.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{AgeCategory, BmiCategory, Category, SensorRecording, SubjectProfile, CHANNEL_COUNT};
use crate::{Error, Result};

pub const GRAVITY: f64 = 9.81;
pub const HARMONICS: usize = 3;
pub const STEP_FREQUENCY_RANGE: (f64, f64) = (1.4, 2.5);

const BASE_AMPLITUDE: [f64; CHANNEL_COUNT] = [1.2, 2.5, 1.8, 0.6, 0.9, 0.4];
const BIAS: [f64; CHANNEL_COUNT] = [0.0, 0.0, GRAVITY, 0.0, 0.0, 0.0];

/// Shared waveform shape; subjects deviate from it by at most `PHASE_JITTER`.
const PHASE_TEMPLATE: [[f64; HARMONICS]; CHANNEL_COUNT] =
    [[0.0, 1.1, 2.3], [0.5, 2.0, 0.7], [1.6, 0.3, 2.9], [2.4, 1.7, 0.2], [0.9, 2.8, 1.4], [3.0, 0.6, 2.1]];
const PHASE_JITTER: f64 = 0.3;
const ACCEL_OFFSET: f64 = 0.5;
const GYRO_OFFSET: f64 = 0.1;

/// SplitMix64 finaliser, used to derive independent per-subject streams.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevels {
    /// m/s²
    pub accel_sd: f64,
    /// rad/s
    pub gyro_sd: f64,
    /// Relative SD of the per-stride amplitude.
    pub stride_amplitude_cv: f64,
    /// Relative SD of the per-stride cadence.
    pub stride_cadence_cv: f64,
}

impl NoiseLevels {
    pub const NONE: Self = Self { accel_sd: 0.0, gyro_sd: 0.0, stride_amplitude_cv: 0.0, stride_cadence_cv: 0.0 };
}

impl Default for NoiseLevels {
    fn default() -> Self {
        Self { accel_sd: 0.3, gyro_sd: 0.05, stride_amplitude_cv: 0.05, stride_cadence_cv: 0.03 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub subjects_per_age_group: usize,
    pub walk_duration_s: f64,
    pub sample_rate: f64,
    pub noise: NoiseLevels,
    /// BMI is drawn uniformly from these ranges, one per category.
    pub bmi_ranges: [(f64, f64); 5],
    pub height_range_m: (f64, f64),
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            subjects_per_age_group: 20,
            walk_duration_s: 10.0,
            sample_rate: crate::domain::DEFAULT_SAMPLE_RATE,
            noise: NoiseLevels::default(),
            bmi_ranges: [(12.5, 14.8), (15.2, 18.3), (19.0, 24.5), (25.5, 29.5), (31.0, 38.0)],
            height_range_m: (1.50, 1.90),
            seed: 0,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subjects_per_age_group == 0 {
            return Err(Error::InvalidParameter("subjects_per_age_group must be positive".into()));
        }
        for (what, v) in [("walk duration", self.walk_duration_s), ("sample rate", self.sample_rate)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NotPositive { what, value: v });
            }
        }
        if self.walk_duration_s * self.sample_rate < 2.0 {
            return Err(Error::RecordingTooShort((self.walk_duration_s * self.sample_rate) as usize));
        }
        for (cat, &(lo, hi)) in BmiCategory::ALL.iter().zip(&self.bmi_ranges) {
            let (clo, chi) = cat.interval();
            if !(lo <= hi && lo >= clo && hi < chi && lo > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "BMI range [{lo}, {hi}] does not lie inside the {} interval",
                    cat.name()
                )));
            }
        }
        let (hlo, hhi) = self.height_range_m;
        if !(hlo > 0.0 && hlo <= hhi) {
            return Err(Error::InvalidParameter(format!("invalid height range [{hlo}, {hhi}]")));
        }
        let n = &self.noise;
        if !(n.accel_sd >= 0.0
            && n.gyro_sd >= 0.0
            && (0.0..0.5).contains(&n.stride_amplitude_cv)
            && (0.0..0.5).contains(&n.stride_cadence_cv))
        {
            return Err(Error::InvalidParameter("noise levels must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitParams {
    /// Hz, within [`STEP_FREQUENCY_RANGE`].
    pub step_frequency: f64,
    pub amplitudes: [f64; CHANNEL_COUNT],
    pub harmonic_weights: [f64; HARMONICS],
    /// Radians, per channel and harmonic.
    pub phases: [[f64; HARMONICS]; CHANNEL_COUNT],
    pub biases: [f64; CHANNEL_COUNT],
    pub noise_sd: [f64; CHANNEL_COUNT],
    pub stride_amplitude_cv: f64,
    pub stride_cadence_cv: f64,
    /// Seeds the stride-to-stride variation, which is part of the clean signal.
    pub stride_seed: u64,
}

impl GaitParams {
    pub fn with_noise(mut self, noise: NoiseLevels) -> Self {
        self.noise_sd = [noise.accel_sd, noise.accel_sd, noise.accel_sd, noise.gyro_sd, noise.gyro_sd, noise.gyro_sd];
        self.stride_amplitude_cv = noise.stride_amplitude_cv;
        self.stride_cadence_cv = noise.stride_cadence_cv;
        self
    }

    /// Noise-free channels, `n` samples at `rate`. Each stride gets its own
    /// cadence and amplitude factor; the amplitude is interpolated across the
    /// stride so the waveform stays continuous.
    pub fn clean_channels(&self, n: usize, rate: f64) -> [Vec<f64>; CHANNEL_COUNT] {
        let mut rng = ChaCha8Rng::seed_from_u64(self.stride_seed);
        let mut draw = |cv: f64| {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            (1.0 + cv * z).clamp(0.5, 1.5)
        };
        let mut strides: Vec<(f64, f64)> = Vec::new();
        let mut phase = Vec::with_capacity(n);
        let mut gain = Vec::with_capacity(n);
        let mut theta = 0.0f64;
        for _ in 0..n {
            let k = (theta / (2.0 * PI)) as usize;
            while strides.len() < k + 2 {
                let cadence = draw(self.stride_cadence_cv);
                let amplitude = draw(self.stride_amplitude_cv);
                strides.push((cadence, amplitude));
            }
            let frac = theta / (2.0 * PI) - k as f64;
            phase.push(theta);
            gain.push(strides[k].1 + (strides[k + 1].1 - strides[k].1) * frac);
            theta += 2.0 * PI * self.step_frequency * strides[k].0 / rate;
        }
        core::array::from_fn(|c| {
            phase
                .iter()
                .zip(&gain)
                .map(|(&theta, &g)| {
                    let mut v = 0.0;
                    for h in 0..HARMONICS {
                        v += self.harmonic_weights[h] * ((h + 1) as f64 * theta + self.phases[c][h]).sin();
                    }
                    self.biases[c] + g * self.amplitudes[c] * v
                })
                .collect()
        })
    }
}

/// Deterministic in `(profile, seed)`; noise defaults to [`NoiseLevels::default`].
pub fn derive_gait_params(profile: &SubjectProfile, seed: u64) -> GaitParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let age = profile.age_years() as f64 - 10.0;
    let bmi = profile.bmi() - 13.0;

    let jitter = rng.random_range(-0.03..0.03);
    let step_frequency =
        (2.35 - 0.008 * age - 0.02 * bmi + jitter).clamp(STEP_FREQUENCY_RANGE.0, STEP_FREQUENCY_RANGE.1);

    let size = (1.6 - 0.035 * bmi).max(0.2) * (1.0 + rng.random_range(-0.02..0.02));
    // Rotation shrinks with age, so the gyro/accel amplitude ratio carries age.
    let sway = (1.4 - 0.018 * age).max(0.2);
    let mut amplitudes = BASE_AMPLITUDE.map(|a| a * size);
    for a in &mut amplitudes[3..] {
        *a *= sway;
    }

    let harmonic_weights = [1.0, 0.2 + 0.01 * age, (0.3 - 0.004 * age).max(0.05)];

    // Zero-offset of the sensor itself; `az` keeps exactly gravity.
    let mut biases = BIAS;
    for (c, b) in biases.iter_mut().enumerate() {
        *b += match c {
            0 | 1 => rng.random_range(-ACCEL_OFFSET..ACCEL_OFFSET),
            3..=5 => rng.random_range(-GYRO_OFFSET..GYRO_OFFSET),
            _ => 0.0,
        };
    }

    let mut phases = PHASE_TEMPLATE;
    for ch in phases.iter_mut() {
        for p in ch.iter_mut() {
            *p += rng.random_range(-PHASE_JITTER..PHASE_JITTER);
        }
    }
    GaitParams {
        step_frequency,
        amplitudes,
        harmonic_weights,
        phases,
        biases,
        noise_sd: [0.0; CHANNEL_COUNT],
        stride_amplitude_cv: 0.0,
        stride_cadence_cv: 0.0,
        stride_seed: rng.random(),
    }
    .with_noise(NoiseLevels::default())
}

pub fn generate_recording(
    subject_id: &str,
    params: &GaitParams,
    duration_s: f64,
    rate: f64,
    seed: u64,
) -> Result<SensorRecording> {
    let n = (duration_s * rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut channels = params.clean_channels(n, rate);
    for (c, x) in channels.iter_mut().enumerate() {
        let noise = Normal::new(0.0, params.noise_sd[c]).expect("noise sd is finite and non-negative");
        for v in x.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    SensorRecording::new(subject_id, rate, channels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub subjects: Vec<SubjectProfile>,
    pub params: Vec<GaitParams>,
    pub recordings: Vec<SensorRecording>,
}

/// Four age groups of `subjects_per_age_group`; within a group, subject `j`
/// is drawn from BMI category `j mod 5` so every category is populated.
pub fn generate_cohort(spec: &CohortSpec) -> Result<SyntheticCohort> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0, 0));
    let mut subjects = Vec::new();
    let mut params = Vec::new();
    let mut recordings = Vec::new();
    for group in AgeCategory::ALL {
        let (lo, hi) = group.range();
        for j in 0..spec.subjects_per_age_group {
            let index = subjects.len();
            let age = rng.random_range(lo..=hi);
            let (blo, bhi) = spec.bmi_ranges[j % BmiCategory::ALL.len()];
            let bmi = if bhi > blo { rng.random_range(blo..bhi) } else { blo };
            let height = rng.random_range(spec.height_range_m.0..=spec.height_range_m.1);
            let id = format!("s{:03}", index + 1);
            let profile = SubjectProfile::new(id.clone(), bmi * height * height, height, age)?;
            let p = derive_gait_params(&profile, derive_seed(spec.seed, 1, index as u64)).with_noise(spec.noise);
            let rec = generate_recording(
                &id,
                &p,
                spec.walk_duration_s,
                spec.sample_rate,
                derive_seed(spec.seed, 2, index as u64),
            )?;
            subjects.push(profile);
            params.push(p);
            recordings.push(rec);
        }
    }
    Ok(SyntheticCohort { subjects, params, recordings })
}
