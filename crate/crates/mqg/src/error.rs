use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Numerical tolerances quoted in the messages are the ones the operations
/// actually enforce; callers that want the raw numbers can match on the
/// variant fields.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("grid size must be even and at least 8, got n = {n}")]
    InvalidGrid { n: usize },

    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("spatial mean {mean:.3e} exceeds tolerance {tol:.3e}; fields must be mean-zero")]
    NonZeroMean { mean: f64, tol: f64 },

    #[error("imaginary residue {residue:.3e} exceeds tolerance {tol:.3e}; spectrum is not Hermitian")]
    BrokenSymmetry { residue: f64, tol: f64 },

    #[error("mode ({k1},{k2}) is zero or lies beyond the dealias cutoff {cutoff}")]
    InvalidMode { k1: i64, k2: i64, cutoff: usize },

    #[error("shell index {j} outside the filter bank range [{j_min}, {j_max}]")]
    JOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("shell pair (j = {j}, k = {k}) violates |j - k| <= 2")]
    BadShellPair { j: i32, k: i32 },

    #[error("solution blew up at t = {t:.6}: max|theta| = {linf:.3e} (guard {guard:.3e})")]
    BlowUp { t: f64, linf: f64, guard: f64 },

    #[error("diagnostic sink failed at t = {t:.6}: {message}")]
    SinkFailure { t: f64, message: String },

    #[error("field is identically zero; ratio is undefined")]
    DegenerateField,

    #[error("malformed snapshot: {reason}")]
    BadSnapshot { reason: String },

    #[error("bad configuration: {reason}")]
    BadConfig { reason: String },

    #[error("io failure on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
