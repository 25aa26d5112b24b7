use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by origin: construction/validation of math objects,
/// protocol-level failures surfaced in results, analysis failures from the
/// fitting routines, and configuration/I-O problems from the harness front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension was below the smallest meaningful value (2).
    #[error("invalid dimension {got}: must be at least 2")]
    InvalidDimension { got: usize },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A parameter vector had the wrong length for its generator set.
    #[error("parameter vector length {got} does not match d\u{b2}-1 = {expected}")]
    ParamLength { expected: usize, got: usize },

    /// A state vector failed the unit-norm check.
    #[error("state is not normalized: \u{2211}|amp|\u{b2} = {norm_sq} (tolerance 1e-10)")]
    NotNormalized { norm_sq: f64 },

    /// A matrix failed the unitarity check at construction.
    #[error("matrix failed unitarity validation: max |U\u{2020}U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    /// A matrix failed the hermiticity check at construction.
    #[error("matrix failed hermiticity validation: max |A - A\u{2020}| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    /// A numeric argument fell outside its documented range.
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    /// A protocol round received a malformed message (e.g. an adversary hook
    /// returned a state of the wrong dimension).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// A fit could not be performed on the given data.
    #[error("fit unavailable: {0}")]
    FitUnavailable(String),

    /// Invalid experiment configuration (schema violation, bad field value,
    /// unknown adversary name, empty sweep list, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Filesystem failure while writing or reading run artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
