//! Crate error type.

use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A base point or base function was fed to a system of another variant.
    #[error("base variant mismatch: expected {expected}, got {got}")]
    VariantMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// A product or Koopman step would push a circle-function frequency past
    /// the configured hard cap.
    #[error("frequency cap exceeded: |{frequency}| > {cap}")]
    FrequencyCap { frequency: i64, cap: i64 },

    /// The z-grid cannot resolve the requested Fourier mode.
    #[error("z-grid of size {size} too small for mode {mode} (need at least {need})")]
    GridTooSmall { size: usize, mode: i64, need: usize },

    /// A fiber coordinate was not on the unit circle.
    #[error("point not on the unit circle: |z| = {modulus}")]
    NotUnimodular { modulus: f64 },

    /// An arithmetic membership test needed an exact irrational tag that is
    /// not present.
    #[error("inexact: {context}")]
    Inexact { context: String },

    /// An operation with an exact contract was asked for data that only the
    /// numeric path can handle.
    #[error("no exact representation: {context}")]
    ExactnessBoundary { context: String },

    /// Fejér–Riesz input failed the strict-positivity gate.
    #[error("polynomial not strictly positive on the circle: grid min {min:e} <= tol {tol:e}")]
    NotPositive { min: f64, tol: f64 },

    /// A factorization root landed inside the circle annulus `[1-tol, 1+tol]`.
    #[error("root {root} within {tol:e} of the unit circle; factorization unstable")]
    RootOnCircle { root: Complex64, tol: f64 },

    /// Root selection did not produce the expected count.
    #[error("selected {selected} roots outside the unit circle, expected {expected}")]
    RootCount { selected: usize, expected: usize },

    /// The eigenvalue iteration did not converge.
    #[error("QR iteration failed to converge within {iterations} steps")]
    EigenNoConvergence { iterations: usize },

    /// A parametric factorization failed at one grid point.
    #[error("factorization failed at grid index {index}: {source}")]
    AtGridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Matrix data failed validation (shape, Hermitian symmetry, trace, PSD).
    #[error("invalid matrix: {context}")]
    InvalidMatrix { context: String },

    /// Matrix or report dimensions do not agree.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A generic argument failed a precondition.
    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },

    /// An operation needed a nonzero cohomology level that the report lacks.
    #[error("cohomology structure missing: {context}")]
    MissingStructure { context: String },

    /// A declared-positive observable could not be verified positive.
    #[error("observable not verifiably positive: grid min {min:e} < -tol {tol:e}")]
    NotVerifiablyPositive { min: f64, tol: f64 },
}

impl Error {
    pub(crate) fn inexact(context: impl Into<String>) -> Self {
        Error::Inexact {
            context: context.into(),
        }
    }

    pub(crate) fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
        }
    }
}
