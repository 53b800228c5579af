//! Gait-signal analysis core: sliding-window segmentation, per-segment
//! statistics, PCA and six from-scratch classifiers with cross-validation.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command line and parallel sweeps live in the `gaitlab` companion crate.
//!
//! ```text
//! SensorRecording ─truncate─▶ 6 channels ─window─▶ segments ─stats─▶ 84 features
//!        │                                                              │
//!        └─ SubjectProfile ─▶ BMI / age label ─────────────────────────▶ FeatureMatrix
//!                                                                       │
//!                        standardize ─▶ (PCA) ─▶ classifier ◀─ k-fold ──┘
//! ```
#![no_std]
#![deny(rust_2018_idioms)]
// When std is anywhere in the build graph its inherent float methods win over
// the libm-backed trait, leaving the trait imports unused.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod domain;
mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod pca;
pub mod synth;
pub mod windowing;

pub use error::{Error, Result};
