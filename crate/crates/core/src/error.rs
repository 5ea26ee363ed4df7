use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,

    #[error("signal too short: need at least {min} samples, got {len}")]
    SignalTooShort { min: usize, len: usize },

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("negative envelope value at index {0}")]
    NegativeEnvelope(usize),

    #[error("invalid sample rate {0} Hz")]
    InvalidSampleRate(f64),

    #[error("empty passband: low_cut {low} >= high_cut {high}")]
    EmptyPassband { low: f64, high: f64 },

    #[error("invalid filter: cutoffs ({low}, {high}) must lie in [0, 0.5]")]
    FilterOutOfRange { low: f64, high: f64 },

    #[error("support violation: x = {0} is outside [0, inf)")]
    SupportViolation(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("undefined CVE (zero-mean envelope)")]
    UndefinedCve,

    #[error("degenerate sample (zero variance)")]
    DegenerateSample,

    #[error("insufficient trials: got {got}, need at least {min}")]
    InsufficientTrials { got: usize, min: usize },

    #[error("length mismatch: signal has {signal} samples, table expects {table}")]
    LengthMismatch { signal: usize, table: usize },

    #[error("table/pipeline mismatch: {0}")]
    PipelineMismatch(String),

    #[error("incompatible table: {0}")]
    IncompatibleTable(String),

    #[error("schema version mismatch: file has version {found}, this build reads version {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("corrupted table: {0}")]
    CorruptTable(String),

    #[error("worker pool: {0}")]
    WorkerPool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
