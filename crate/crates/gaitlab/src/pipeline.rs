//! Cohorts on disk or in memory, and per-subject feature extraction.

use std::path::{Path, PathBuf};

use gaitlab_core::domain::{SensorRecording, SubjectProfile, Task, TruncationSpec};
use gaitlab_core::features::{assemble_with, FeatureMatrix};
use gaitlab_core::synth::{generate_cohort, CohortSpec};
use gaitlab_core::windowing::{Segmenter, WindowSpec};
use rayon::prelude::*;

use crate::ingest::{self, CohortManifest, ManifestEntry};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub subjects: Vec<SubjectProfile>,
    pub recordings: Vec<SensorRecording>,
}

impl Cohort {
    /// Reads every recording named by the manifest, in manifest order.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(manifest_path).map_err(Error::io(manifest_path))?;
        let manifest = ingest::load_manifest(&text)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let recordings = manifest
            .entries
            .par_iter()
            .map(|e| {
                let path = base.join(&e.path);
                ingest::read_recording_file(&path, e.subject.id(), manifest.sample_rate_hz)
                    .map_err(|source| Error::Subject { id: e.subject.id().to_owned(), source: Box::new(source) })
            })
            .collect::<Result<Vec<_>>>()?;
        let subjects = manifest.entries.into_iter().map(|e| e.subject).collect();
        Ok(Self { subjects, recordings })
    }

    pub fn from_synthetic(spec: &CohortSpec) -> Result<Self> {
        let c = generate_cohort(spec)?;
        Ok(Self { subjects: c.subjects, recordings: c.recordings })
    }

    /// Writes `manifest.json` and one `recordings/<id>.csv` per subject.
    pub fn write(&self, dir: &Path) -> Result<CohortManifest> {
        let rec_dir = dir.join("recordings");
        std::fs::create_dir_all(&rec_dir).map_err(Error::io(&rec_dir))?;
        let mut manifest = CohortManifest {
            sample_rate_hz: self
                .recordings
                .first()
                .map_or(gaitlab_core::domain::DEFAULT_SAMPLE_RATE, |r| r.sample_rate()),
            entries: Vec::with_capacity(self.subjects.len()),
        };
        self.subjects.par_iter().zip(&self.recordings).try_for_each(|(s, r)| {
            let path = rec_dir.join(format!("{}.csv", s.id()));
            std::fs::write(&path, ingest::write_recording(r)).map_err(Error::io(&path))
        })?;
        for s in &self.subjects {
            manifest.entries.push(ManifestEntry {
                subject: s.clone(),
                path: PathBuf::from("recordings").join(format!("{}.csv", s.id())),
            });
        }
        let path = dir.join("manifest.json");
        std::fs::write(&path, ingest::manifest_to_json(&manifest)).map_err(Error::io(&path))?;
        Ok(manifest)
    }

    /// Truncates each recording, windows it and stacks the rows in subject
    /// order. All recordings must share one sample rate.
    pub fn features(&self, task: Task, window: &WindowSpec, truncation: &TruncationSpec) -> Result<FeatureMatrix> {
        let Some(first) = self.recordings.first() else {
            return Ok(FeatureMatrix::new());
        };
        let rate = first.sample_rate();
        if let Some(r) = self.recordings.iter().find(|r| r.sample_rate() != rate) {
            return Err(Error::Format(format!(
                "{} is sampled at {} Hz, others at {rate} Hz",
                r.subject_id(),
                r.sample_rate()
            )));
        }
        let segmenter = Segmenter::new(window, rate)?;
        let parts = self
            .subjects
            .par_iter()
            .zip(&self.recordings)
            .map(|(s, r)| {
                r.truncate(truncation)
                    .and_then(|t| assemble_with(&t, &segmenter, task.label_for(s)))
                    .map_err(|e| Error::Subject { id: s.id().to_owned(), source: Box::new(e.into()) })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = FeatureMatrix::new();
        for p in parts {
            m.extend(p)?;
        }
        Ok(m)
    }
}
