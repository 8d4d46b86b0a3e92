use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} outside window [{lo}, {hi}]")]
    WindowBounds { index: i64, lo: i64, hi: i64 },

    #[error("time {time} outside range [{lo}, {hi}]")]
    TimeBounds { time: f64, lo: f64, hi: f64 },

    #[error("A_{index} is not invertible (‖A·A⁻¹ − Id‖∞ = {defect:e})")]
    NotInvertible { index: i64, defect: f64 },

    #[error("projection at {at} is not idempotent (‖P² − P‖∞ = {defect:e})")]
    NotIdempotent { at: String, defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("window mismatch: expected {expected} samples, got {got}")]
    WindowMismatch { expected: usize, got: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error(
        "no exponential dichotomy detected (fitted rate {rate:e}; slowest decay at ({t}, {s}))"
    )]
    NoDichotomy { rate: f64, t: f64, s: f64 },

    #[error("projections do not commute with the evolution (defect {defect:e} at ({t}, {s}))")]
    ProjectionNotInvariant { defect: f64, t: f64, s: f64 },

    #[error("not a contraction: q = {q} at {at}")]
    NotAContraction { q: f64, at: String },

    #[error(
        "Picard iteration did not converge in {iterations} iterations (last step {last_step:e})"
    )]
    NonConvergence {
        iterations: usize,
        last_step: f64,
        steps: Vec<f64>,
    },

    #[error("parameter jet unavailable: {0}")]
    JetUnavailable(String),

    #[error("unknown gallery system `{0}`")]
    UnknownGallery(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("seed outside the shadowing ball: ‖seed‖∞ = {norm} > {radius}")]
    SeedOutsideBall { norm: f64, radius: f64 },

    #[error("interpolation at {t} outside grid [{lo}, {hi}]")]
    Interpolation { t: f64, lo: f64, hi: f64 },

    #[error("quadrature setup failed: {0}")]
    Quadrature(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
