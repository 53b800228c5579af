//! Subjects, recordings and the BMI / age labelling rules.
//!
//! BMI bins follow the WHO obesity classes with left-closed intervals:
//!
//! | category             | BMI (kg/m²)  |
//! |----------------------|--------------|
//! | severely underweight | < 15         |
//! | underweight          | [15, 18.5)   |
//! | normal               | [18.5, 25)   |
//! | overweight           | [25, 30)     |
//! | severely overweight  | ≥ 30         |
//!
//! Age groups are integer years: 10–20, 21–30, 31–40 and 41–60.
//!
//! Raw sensor values are the observable sum of motion, gravity and white
//! sensor noise; no attempt is made to separate those terms.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MIN_AGE: u32 = 10;
pub const MAX_AGE: u32 = 60;
pub const DEFAULT_SAMPLE_RATE: f64 = 180.0;
pub const CHANNEL_COUNT: usize = 6;

fn require_positive(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NotPositive { what, value })
    }
}

/// Body mass index (Quetelet index), `mass / height²`.
pub fn compute_bmi(mass_kg: f64, height_m: f64) -> Result<f64> {
    let mass = require_positive("mass", mass_kg)?;
    let height = require_positive("height", height_m)?;
    Ok(mass / (height * height))
}

/// A closed set of class labels with a fixed, ordered index.
pub trait Category: Copy + Eq + Ord + fmt::Debug + 'static {
    const ALL: &'static [Self];

    fn index(self) -> usize;

    fn name(self) -> &'static str;

    fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BmiCategory {
    SeverelyUnderweight,
    Underweight,
    Normal,
    Overweight,
    SeverelyOverweight,
}

impl Category for BmiCategory {
    const ALL: &'static [Self] =
        &[Self::SeverelyUnderweight, Self::Underweight, Self::Normal, Self::Overweight, Self::SeverelyOverweight];

    fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            Self::SeverelyUnderweight => "SeverelyUnderweight",
            Self::Underweight => "Underweight",
            Self::Normal => "Normal",
            Self::Overweight => "Overweight",
            Self::SeverelyOverweight => "SeverelyOverweight",
        }
    }
}

impl BmiCategory {
    /// Half-open BMI interval `[low, high)` covered by the category.
    pub fn interval(self) -> (f64, f64) {
        match self {
            Self::SeverelyUnderweight => (0.0, 15.0),
            Self::Underweight => (15.0, 18.5),
            Self::Normal => (18.5, 25.0),
            Self::Overweight => (25.0, 30.0),
            Self::SeverelyOverweight => (30.0, f64::INFINITY),
        }
    }
}

pub fn categorize_bmi(bmi: f64) -> Result<BmiCategory> {
    let bmi = require_positive("bmi", bmi)?;
    Ok(if bmi < 15.0 {
        BmiCategory::SeverelyUnderweight
    } else if bmi < 18.5 {
        BmiCategory::Underweight
    } else if bmi < 25.0 {
        BmiCategory::Normal
    } else if bmi < 30.0 {
        BmiCategory::Overweight
    } else {
        BmiCategory::SeverelyOverweight
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeCategory {
    Young,
    YoungAdult,
    Adult,
    Aged,
}

impl Category for AgeCategory {
    const ALL: &'static [Self] = &[Self::Young, Self::YoungAdult, Self::Adult, Self::Aged];

    fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            Self::Young => "Young",
            Self::YoungAdult => "YoungAdult",
            Self::Adult => "Adult",
            Self::Aged => "Aged",
        }
    }
}

impl AgeCategory {
    /// Inclusive age range in years.
    pub fn range(self) -> (u32, u32) {
        match self {
            Self::Young => (10, 20),
            Self::YoungAdult => (21, 30),
            Self::Adult => (31, 40),
            Self::Aged => (41, 60),
        }
    }
}

pub fn categorize_age(age_years: u32) -> Result<AgeCategory> {
    match age_years {
        10..=20 => Ok(AgeCategory::Young),
        21..=30 => Ok(AgeCategory::YoungAdult),
        31..=40 => Ok(AgeCategory::Adult),
        41..=60 => Ok(AgeCategory::Aged),
        other => Err(Error::AgeOutOfRange(other)),
    }
}

/// Which physiological parameter a feature matrix is labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Bmi,
    Age,
}

impl Task {
    pub fn n_classes(self) -> usize {
        match self {
            Task::Bmi => BmiCategory::ALL.len(),
            Task::Age => AgeCategory::ALL.len(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Bmi => "bmi",
            Task::Age => "age",
        }
    }

    pub fn class_names(self) -> Vec<&'static str> {
        match self {
            Task::Bmi => BmiCategory::ALL.iter().map(|c| c.name()).collect(),
            Task::Age => AgeCategory::ALL.iter().map(|c| c.name()).collect(),
        }
    }

    pub fn label_for(self, subject: &SubjectProfile) -> Label {
        match self {
            Task::Bmi => Label::Bmi(subject.bmi_category()),
            Task::Age => Label::Age(subject.age_category()),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bmi" => Ok(Task::Bmi),
            "age" => Ok(Task::Age),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown task {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Bmi(BmiCategory),
    Age(AgeCategory),
}

impl Label {
    pub fn task(self) -> Task {
        match self {
            Label::Bmi(_) => Task::Bmi,
            Label::Age(_) => Task::Age,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Bmi(c) => c.index(),
            Label::Age(c) => c.index(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Bmi(c) => c.name(),
            Label::Age(c) => c.name(),
        }
    }

    /// Resolves a category name from either enumeration; the two name sets
    /// are disjoint.
    pub fn from_name(name: &str) -> Option<Self> {
        BmiCategory::from_name(name).map(Label::Bmi).or_else(|| AgeCategory::from_name(name).map(Label::Age))
    }

    pub fn from_index(task: Task, index: usize) -> Option<Self> {
        match task {
            Task::Bmi => BmiCategory::from_index(index).map(Label::Bmi),
            Task::Age => AgeCategory::from_index(index).map(Label::Age),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    id: String,
    mass_kg: f64,
    height_m: f64,
    age_years: u32,
}

impl SubjectProfile {
    pub fn new(id: impl Into<String>, mass_kg: f64, height_m: f64, age_years: u32) -> Result<Self> {
        require_positive("mass", mass_kg)?;
        require_positive("height", height_m)?;
        categorize_age(age_years)?;
        Ok(Self { id: id.into(), mass_kg, height_m, age_years })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_kg
    }

    pub fn height_m(&self) -> f64 {
        self.height_m
    }

    pub fn age_years(&self) -> u32 {
        self.age_years
    }

    pub fn bmi(&self) -> f64 {
        self.mass_kg / (self.height_m * self.height_m)
    }

    pub fn bmi_category(&self) -> BmiCategory {
        categorize_bmi(self.bmi()).expect("validated mass and height give a positive BMI")
    }

    pub fn age_category(&self) -> AgeCategory {
        categorize_age(self.age_years).expect("validated age is in range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// Accelerometer, m/s².
    Ax,
    Ay,
    Az,
    /// Gyroscope, rad/s.
    Gx,
    Gy,
    Gz,
}

impl Channel {
    pub const ALL: [Channel; CHANNEL_COUNT] =
        [Channel::Ax, Channel::Ay, Channel::Az, Channel::Gx, Channel::Gy, Channel::Gz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Ax => "ax",
            Channel::Ay => "ay",
            Channel::Az => "az",
            Channel::Gx => "gx",
            Channel::Gy => "gy",
            Channel::Gz => "gz",
        }
    }
}

/// Seconds trimmed from both ends of a walk to drop phone handling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub head_s: f64,
    pub tail_s: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { head_s: 2.0, tail_s: 2.0 }
    }
}

impl TruncationSpec {
    pub const NONE: TruncationSpec = TruncationSpec { head_s: 0.0, tail_s: 0.0 };

    /// Samples removed at each end for the given rate.
    pub fn sample_counts(&self, sample_rate: f64) -> Result<(usize, usize)> {
        for (what, v) in [("truncation head", self.head_s), ("truncation tail", self.tail_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::NotPositive { what, value: v });
            }
        }
        Ok(((self.head_s * sample_rate).round() as usize, (self.tail_s * sample_rate).round() as usize))
    }
}

/// Six aligned, uniformly sampled inertial channels of one walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecording {
    subject_id: String,
    sample_rate: f64,
    channels: [Vec<f64>; CHANNEL_COUNT],
}

impl SensorRecording {
    pub fn new(subject_id: impl Into<String>, sample_rate: f64, channels: [Vec<f64>; CHANNEL_COUNT]) -> Result<Self> {
        require_positive("sample rate", sample_rate)?;
        let lens = channels.each_ref().map(Vec::len);
        if lens.iter().any(|&l| l != lens[0]) {
            return Err(Error::RaggedChannels(lens));
        }
        if lens[0] < 2 {
            return Err(Error::RecordingTooShort(lens[0]));
        }
        Ok(Self { subject_id: subject_id.into(), sample_rate, channels })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    /// Always false: a valid recording holds at least two samples.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn channel(&self, channel: Channel) -> &[f64] {
        &self.channels[channel.index()]
    }

    pub fn channels(&self) -> &[Vec<f64>; CHANNEL_COUNT] {
        &self.channels
    }

    /// Sample `n` across all six channels, in channel order.
    pub fn sample(&self, n: usize) -> [f64; CHANNEL_COUNT] {
        core::array::from_fn(|c| self.channels[c][n])
    }

    /// Drops `round(head·rate)` leading and `round(tail·rate)` trailing
    /// samples from every channel.
    pub fn truncate(&self, spec: &TruncationSpec) -> Result<Self> {
        let (head, tail) = spec.sample_counts(self.sample_rate)?;
        let len = self.len();
        if head + tail >= len {
            return Err(Error::OverTruncation { removed: head + tail, len });
        }
        let channels = self.channels.each_ref().map(|c| c[head..len - tail].to_vec());
        Ok(Self { subject_id: self.subject_id.clone(), sample_rate: self.sample_rate, channels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn bmi_examples() {
        assert!((compute_bmi(70.0, 1.75).unwrap() - 22.857_142_857_142_858).abs() < 1e-9);
        assert!((compute_bmi(45.0, 1.80).unwrap() - 13.888_888_888_888_89).abs() < 1e-9);
        let h: f64 = 1.7;
        assert!((compute_bmi(h * h, h).unwrap() - 1.0).abs() < 1e-12);
        assert!(compute_bmi(-1.0, 1.7).is_err());
        assert!(compute_bmi(70.0, 0.0).is_err());
        assert!(compute_bmi(f64::NAN, 1.7).is_err());
    }

    #[test]
    fn bmi_categories_and_boundaries() {
        assert_eq!(categorize_bmi(14.0).unwrap(), BmiCategory::SeverelyUnderweight);
        assert_eq!(categorize_bmi(22.857).unwrap(), BmiCategory::Normal);
        assert_eq!(categorize_bmi(18.5).unwrap(), BmiCategory::Normal);
        assert_eq!(categorize_bmi(15.0).unwrap(), BmiCategory::Underweight);
        assert_eq!(categorize_bmi(25.0).unwrap(), BmiCategory::Overweight);
        assert_eq!(categorize_bmi(30.0).unwrap(), BmiCategory::SeverelyOverweight);
        assert!(categorize_bmi(0.0).is_err());
        assert!(categorize_bmi(f64::INFINITY).is_err());
    }

    #[test]
    fn age_categories() {
        assert_eq!(categorize_age(25).unwrap(), AgeCategory::YoungAdult);
        assert_eq!(categorize_age(20).unwrap(), AgeCategory::Young);
        assert_eq!(categorize_age(21).unwrap(), AgeCategory::YoungAdult);
        assert_eq!(categorize_age(60).unwrap(), AgeCategory::Aged);
        assert_eq!(categorize_age(61), Err(Error::AgeOutOfRange(61)));
        assert_eq!(categorize_age(9), Err(Error::AgeOutOfRange(9)));
    }

    #[test]
    fn labels_resolve_by_name() {
        assert_eq!(Label::from_name("Aged"), Some(Label::Age(AgeCategory::Aged)));
        assert_eq!(Label::from_name("Overweight"), Some(Label::Bmi(BmiCategory::Overweight)));
        assert_eq!(Label::from_name("aged"), None);
    }

    #[test]
    fn profile_validation() {
        assert!(SubjectProfile::new("s01", 70.0, 1.75, 25).is_ok());
        assert!(SubjectProfile::new("s01", -5.0, 1.75, 25).is_err());
        assert!(SubjectProfile::new("s01", 70.0, 1.75, 65).is_err());
    }

    fn recording(len: usize) -> SensorRecording {
        let ch = |k: f64| (0..len).map(|i| i as f64 + k).collect::<Vec<_>>();
        SensorRecording::new("s", 180.0, [ch(0.0), ch(1.0), ch(2.0), ch(3.0), ch(4.0), ch(5.0)]).unwrap()
    }

    #[test]
    fn recording_invariants() {
        let short = SensorRecording::new("s", 180.0, core::array::from_fn(|_| vec![1.0]));
        assert_eq!(short, Err(Error::RecordingTooShort(1)));
        let mut chans: [Vec<f64>; 6] = core::array::from_fn(|_| vec![0.0; 4]);
        chans[3].push(1.0);
        assert!(matches!(SensorRecording::new("s", 180.0, chans), Err(Error::RaggedChannels(_))));
    }

    #[test]
    fn truncation_examples() {
        let rec = recording(1800);
        let spec = TruncationSpec { head_s: 1.0, tail_s: 1.0 };
        let t = rec.truncate(&spec).unwrap();
        assert_eq!(t.len(), 1440);
        for c in Channel::ALL {
            assert_eq!(t.channel(c), &rec.channel(c)[180..1620]);
        }
        assert_eq!(rec.truncate(&TruncationSpec::NONE).unwrap(), rec);
        let err = recording(100).truncate(&TruncationSpec { head_s: 1.0, tail_s: 0.0 });
        assert!(matches!(err, Err(Error::OverTruncation { .. })));
    }

    proptest! {
        #[test]
        fn bmi_category_is_monotone(a in 0.1f64..80.0, b in 0.1f64..80.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(categorize_bmi(lo).unwrap() <= categorize_bmi(hi).unwrap());
        }

        #[test]
        fn age_category_is_monotone(a in 10u32..=60, b in 10u32..=60) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(categorize_age(lo).unwrap() <= categorize_age(hi).unwrap());
        }

        #[test]
        fn bmi_is_linear_in_mass(m in 1.0f64..200.0, h in 0.5f64..2.5, c in 0.1f64..10.0) {
            let lhs = compute_bmi(c * m, h).unwrap();
            let rhs = c * compute_bmi(m, h).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        #[test]
        fn truncated_length(len in 2usize..600, head in 0.0f64..2.0, tail in 0.0f64..2.0) {
            let rec = recording(len);
            let spec = TruncationSpec { head_s: head, tail_s: tail };
            let (h, t) = ((head * 180.0).round() as usize, (tail * 180.0).round() as usize);
            match rec.truncate(&spec) {
                Ok(out) => prop_assert_eq!(out.len(), len - h - t),
                Err(_) => prop_assert!(h + t >= len),
            }
        }
    }
}
