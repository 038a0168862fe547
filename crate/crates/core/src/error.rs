use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("kernel `{kernel}`: {message}")]
    KernelParameter { kernel: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel is numerically zero on [{lo}, {hi}]")]
    UnsupportedKernel { lo: f64, hi: f64 },

    #[error("support root bracketing failed ({side} bound); F at probes: {probes:?}")]
    SupportBracketing {
        side: &'static str,
        probes: Vec<(f64, f64)>,
    },

    #[error("invalid chain state: {0}")]
    InvalidState(String),

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("slice invariant violated: log g(current) = {log_g_current} <= log u = {log_u}")]
    SliceInvariant { log_g_current: f64, log_u: f64 },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
