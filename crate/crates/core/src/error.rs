use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} must be finite and positive, got {value}")]
    NotPositive { what: &'static str, value: f64 },
    #[error("age {0} is outside the labelled range 10..=60")]
    AgeOutOfRange(u32),
    #[error("recording channels have unequal lengths ({0:?})")]
    RaggedChannels([usize; 6]),
    #[error("recording has {0} samples, need at least 2")]
    RecordingTooShort(usize),
    #[error("truncation removes {removed} of {len} samples")]
    OverTruncation { removed: usize, len: usize },
    #[error("window spans {len} samples, need at least {min}")]
    WindowTooShort { len: usize, min: usize },
    #[error("signal of {signal} samples is shorter than one window of {window}")]
    SignalTooShort { signal: usize, window: usize },
    #[error("segment of {0} samples is too short, need at least 4")]
    SegmentTooShort(usize),
    #[error("window weights are all zero")]
    ZeroWindow,
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("label {label} is outside the {n_classes} declared classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("number of components must be in 1..={max}, got {got}")]
    ComponentsOutOfRange { got: usize, max: usize },
    #[error("class {class} has {count} members, fewer than k = {k}")]
    ClassTooSmall { class: usize, count: usize, k: usize },
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: Box<Error> },
    #[error("confusion matrix is empty")]
    EmptyConfusion,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
