use thiserror::Error;

/// Errors produced by the geometric and quantum routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a square matrix of even dimension, found {rows}x{cols}")]
    NotEvenSquare { rows: usize, cols: usize },

    #[error("matrix is not symplectic (residual {residual:e})")]
    NotSymplectic { residual: f64 },

    #[error("blocks do not define a unitary matrix (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("zero vector")]
    ZeroVector,

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("basis is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("subspace is not Lagrangian (max |omega| = {max_omega:e})")]
    NotLagrangian { max_omega: f64 },

    #[error("planes are not transversal (smallest singular value {sigma_min:e})")]
    NotTransversal { sigma_min: f64 },

    #[error("point does not lie on the plane (residual {residual:e})")]
    NotOnPlane { residual: f64 },

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("center is not interior to the body (gauge {gauge})")]
    NotInterior { gauge: f64 },

    #[error("body is not centrally symmetric and no explicit center was given")]
    NotCentrallySymmetric,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{solver} did not converge after {iterations} iterations")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
    },

    #[error("not a quantum blob: {0}")]
    NotABlob(String),

    #[error("operation requires a centered state")]
    OffCenter,
}

pub type Result<T> = std::result::Result<T, Error>;
