//! Recording logs, cohort manifests and feature-matrix CSV.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gaitlab_core::domain::{Label, SensorRecording, SubjectProfile, CHANNEL_COUNT, DEFAULT_SAMPLE_RATE};
use gaitlab_core::features::{feature_column_names, FeatureMatrix, FeatureRow, FEATURE_COUNT};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const RECORDING_HEADER: &str = "t_ms,ax,ay,az,gx,gy,gz";

/// Parses `t_ms,ax,ay,az,gx,gy,gz` rows. A first line whose leading field is
/// not a number is taken as a header. Timestamps are ignored.
pub fn parse_recording(text: &str, subject_id: &str, sample_rate: f64) -> Result<SensorRecording> {
    let mut channels: [Vec<f64>; CHANNEL_COUNT] = Default::default();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if line == 1 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        if fields.len() != CHANNEL_COUNT + 1 {
            return Err(Error::parse(line, format!("expected {} fields, found {}", CHANNEL_COUNT + 1, fields.len())));
        }
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(line, format!("field {} is not a number: {field:?}", col + 1)))?;
            if !v.is_finite() {
                return Err(Error::parse(line, format!("field {} is not finite", col + 1)));
            }
            if col > 0 {
                channels[col - 1].push(v);
            }
        }
    }
    if channels[0].len() < 2 {
        return Err(Error::parse(last_line.max(1), format!("fewer than 2 samples ({})", channels[0].len())));
    }
    Ok(SensorRecording::new(subject_id, sample_rate, channels)?)
}

/// Inverse of [`parse_recording`]; `t_ms` is synthesised from the rate.
pub fn write_recording(rec: &SensorRecording) -> String {
    let mut out = String::with_capacity(rec.len() * 80);
    out.push_str(RECORDING_HEADER);
    out.push('\n');
    for n in 0..rec.len() {
        out.push_str(&(n as f64 * 1000.0 / rec.sample_rate()).to_string());
        for v in rec.sample(n) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn read_recording_file(path: &Path, subject_id: &str, sample_rate: f64) -> Result<SensorRecording> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    parse_recording(&text, subject_id, sample_rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub subject: SubjectProfile,
    /// As written in the manifest; relative paths resolve against its directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortManifest {
    pub sample_rate_hz: f64,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    sample_rate_hz: f64,
    subjects: Vec<RawEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    mass_kg: f64,
    height_m: f64,
    age_years: i64,
    path: PathBuf,
}

/// Checks every entry and reports all offending ones together.
pub fn load_manifest(text: &str) -> Result<CohortManifest> {
    let raw: RawManifest = serde_json::from_str(text)?;
    let mut problems = Vec::new();
    if !(raw.sample_rate_hz.is_finite() && raw.sample_rate_hz > 0.0) {
        problems.push(format!("sample_rate_hz must be positive, got {}", raw.sample_rate_hz));
    }
    let mut ids = BTreeSet::new();
    let mut paths = BTreeSet::new();
    let mut entries = Vec::with_capacity(raw.subjects.len());
    for (i, e) in raw.subjects.into_iter().enumerate() {
        let name = if e.id.is_empty() { format!("entry {}", i + 1) } else { format!("{:?}", e.id) };
        if e.id.is_empty() {
            problems.push(format!("{name}: empty id"));
        } else if !ids.insert(e.id.clone()) {
            problems.push(format!("{name}: duplicate id"));
        }
        if !paths.insert(e.path.clone()) {
            problems.push(format!("{name}: duplicate path {}", e.path.display()));
        }
        let age = match u32::try_from(e.age_years) {
            Ok(a) => a,
            Err(_) => {
                problems.push(format!("{name}: age {} is out of range", e.age_years));
                continue;
            }
        };
        match SubjectProfile::new(e.id.clone(), e.mass_kg, e.height_m, age) {
            Ok(subject) => entries.push(ManifestEntry { subject, path: e.path }),
            Err(err) => problems.push(format!("{name}: {err}")),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    Ok(CohortManifest { sample_rate_hz: raw.sample_rate_hz, entries })
}

pub fn manifest_to_json(m: &CohortManifest) -> String {
    let raw = RawManifest {
        sample_rate_hz: m.sample_rate_hz,
        subjects: m
            .entries
            .iter()
            .map(|e| RawEntry {
                id: e.subject.id().to_owned(),
                mass_kg: e.subject.mass_kg(),
                height_m: e.subject.height_m(),
                age_years: e.subject.age_years().into(),
                path: e.path.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("manifest is always serializable");
    s.push('\n');
    s
}

impl Default for CohortManifest {
    fn default() -> Self {
        Self { sample_rate_hz: DEFAULT_SAMPLE_RATE, entries: Vec::new() }
    }
}

/// 84 named feature columns, then `label` and `subject_id`. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn save_feature_matrix(m: &FeatureMatrix) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = feature_column_names();
    header.push("label".into());
    header.push("subject_id".into());
    w.write_record(&header)?;
    for row in m.rows() {
        let mut rec: Vec<String> = row.features.iter().map(f64::to_string).collect();
        rec.push(row.label.name().into());
        rec.push(row.subject_id.clone());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn load_feature_matrix(text: &str) -> Result<FeatureMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let expected = FEATURE_COUNT + 2;
    if header.len() != expected {
        return Err(Error::Format(format!(
            "expected {FEATURE_COUNT} feature columns plus label and subject_id, found {} columns",
            header.len()
        )));
    }
    for (i, (got, want)) in header.iter().zip(feature_column_names()).enumerate() {
        if got != want {
            return Err(Error::Format(format!("column {} is {got:?}, expected {want:?}", i + 1)));
        }
    }
    if &header[FEATURE_COUNT] != "label" || &header[FEATURE_COUNT + 1] != "subject_id" {
        return Err(Error::Format("last two columns must be label, subject_id".into()));
    }
    let mut m = FeatureMatrix::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != expected {
            return Err(Error::parse(line, format!("expected {expected} fields, found {}", rec.len())));
        }
        let features = rec
            .iter()
            .take(FEATURE_COUNT)
            .map(|f| f.parse::<f64>().map_err(|_| Error::parse(line, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        let label = Label::from_name(&rec[FEATURE_COUNT])
            .ok_or_else(|| Error::parse(line, format!("unknown label {:?}", &rec[FEATURE_COUNT])))?;
        let row = FeatureRow { features, label, subject_id: rec[FEATURE_COUNT + 1].to_owned(), degenerate: false };
        m.push(row).map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows() {
        let text = "t_ms,ax,ay,az,gx,gy,gz\n0,1,2,3,4,5,6\n5.5,1,2,3,4,5,6\n11,0.5,-2,9.81,0,0,1e-3\n";
        let rec = parse_recording(text, "a", 180.0).unwrap();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.sample(2), [0.5, -2.0, 9.81, 0.0, 0.0, 1e-3]);
        let again = parse_recording(&write_recording(&rec), "a", 180.0).unwrap();
        assert_eq!(again, rec);
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let err = parse_recording("0,1,2,3,4,5,6\n1,1,2,3,4,5\n", "a", 180.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_recording("0,1,2,3,4,5,6\n1,1,2,x,4,5,6\n", "a", 180.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_recording("0,1,2,3,4,5,6\n1,1,2,NaN,4,5,6\n", "a", 180.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_recording("t_ms,ax,ay,az,gx,gy,gz\n", "a", 180.0).unwrap_err();
        assert!(err.to_string().contains("fewer than 2 samples"), "{err}");
        assert!(parse_recording("", "a", 180.0).is_err());
    }
}
