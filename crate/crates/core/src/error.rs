//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong during an analysis.
///
/// Violations of input invariants are *not* errors; they are reported as data
/// by [`crate::algebra::validate`]. Errors signal either misuse (dimension
/// mismatches, bad modes) or numerical situations where no trustworthy verdict
/// exists.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric is not positive definite (smallest eigenvalue {eigenvalue:e})")]
    SingularMetric { eigenvalue: f64 },

    #[error(
        "rank decision ill-conditioned in {context}: normalized singular value {sigma:e} \
         lies within a factor 10 of the threshold {tol:e}"
    )]
    IllConditioned {
        context: &'static str,
        sigma: f64,
        tol: f64,
    },

    #[error("degenerate plane: normalized Gram determinant {gram:e} below threshold")]
    DegeneratePlane { gram: f64 },

    #[error("bounded algebra is not closed under the bracket: residual {residual:e}")]
    SubalgebraClosureViolation { residual: f64 },

    #[error("null-Jacobi transvection set failed the linearity verification: residual {residual:e}")]
    NonlinearNullJacobiSet { residual: f64 },

    #[error("no adapted transvection exists in the given algebra within tolerance")]
    NoWitness,

    #[error("holonomy closure grew past {limit} dimensions; tolerance failure")]
    ClosureOverflow { limit: usize },

    #[error("invariant-subspace certification inconclusive: {details}")]
    Inconclusive { details: String },

    #[error("eigenvalue clustering prevents unambiguous plane separation (min relative gap {gap:e})")]
    EigenDegeneracy { gap: f64 },

    #[error("vector is not in the nullity: relative residual {residual:e}")]
    NotInNullity { residual: f64 },

    #[error("example dimension must be at least {min}, got {got}")]
    BadDimension { min: usize, got: usize },

    #[error("operation is only defined for the default example family")]
    BadMode,

    #[error("certificate failed at clause `{clause}`: {details}")]
    CertificateFailure { clause: String, details: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
