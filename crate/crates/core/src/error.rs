use thiserror::Error;

/// Errors raised by the numerical kernels, mappings, diagnostics and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric positive definite (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    NotSpd { lambda_min: f64, lambda_max: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("conjugate gradients did not converge in {iters} iterations (relative residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("inner Newton solve did not converge in {iters} iterations (|grad_u G| = {residual:e})")]
    InnerDivergence { iters: usize, residual: f64 },

    #[error("strict second-order sufficiency violated at the inner solution (lambda_min = {lambda_min:e})")]
    SsoscViolation { lambda_min: f64 },

    #[error("implicit mapping does not provide third-derivative tensors")]
    MissingThirdDerivatives,

    #[error("operation requires an affine or constant mapping")]
    WrongMappingKind,

    #[error("tangent space of the feasible manifold is rank deficient")]
    DegenerateTangent,

    #[error("point is not critical: |grad f| = {grad_norm:e}")]
    NotCritical { grad_norm: f64 },

    #[error("Hessian kernel does not match the solution tangent: {0}")]
    KernelMismatch(String),

    #[error("no usable sample points in region")]
    EmptySample,

    #[error("line search stalled after {shrinks} shrinks")]
    LineSearchStall { shrinks: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("problem has no known solution set")]
    NoSolutionSet,
}

pub type Result<T> = std::result::Result<T, Error>;
