use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("input is not Hermitian (residual {residual:e})")]
    NonHermitianInput { residual: f64 },

    #[error("{0} failed to converge")]
    ConvergenceFailure(&'static str),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("output is not real (imaginary part {imag:e})")]
    ComplexOutput { imag: f64 },

    #[error("Cayley retraction system is singular")]
    CayleySolveFailure,

    #[error("matrix is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("triangular factor has a zero diagonal entry")]
    SingularTriangular,

    #[error("point violates the manifold constraint (residual {residual:e})")]
    ConstraintViolation { residual: f64 },

    #[error("vector is not tangent at the base point (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("gradient contains a non-finite entry")]
    NonFiniteGradient,

    #[error("gate is not unitary (residual {residual:e})")]
    NonUnitaryGate { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::ShapeMismatch { op, detail: detail.into() }
}
