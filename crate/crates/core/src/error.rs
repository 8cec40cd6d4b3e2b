use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VarIndex { index: usize, nvars: usize },
    #[error("evaluation point has length {got}, expected {expected}")]
    PointLength { got: usize, expected: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NonSquare { rows: usize, row: usize, cols: usize },
    #[error("discriminant requires degree at least 1")]
    ZeroDegree,
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("conjugate symmetry violated: {0}")]
    ConjugateSymmetry(String),
    #[error("model is malformed: {0}")]
    Malformed(String),
    #[error("boundary equation fails for polynomial {boundary} in coordinate {coord}: {reason}")]
    BoundaryViolation {
        boundary: usize,
        coord: usize,
        reason: String,
    },
    #[error("operator raises degree: L({monomial}) has degree {got} > {max}")]
    DegreeEscape {
        monomial: String,
        got: u32,
        max: u32,
    },
    #[error("f is not an eigenvector: residual {0}")]
    NotEigen(String),
    #[error("exponent {0} is not a nonnegative integer")]
    NonIntegerExponent(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("missing or invalid parameter `{0}`")]
    BadParameter(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("model uses conjugate-pair coordinates; convert with to_real() first")]
    ComplexCoordinates,
    #[error("initial point lies outside the domain (predicate {0} is negative)")]
    OutsideDomain(usize),
    #[error("Cholesky factorisation failed: pivot {pivot} at row {row}")]
    Cholesky { row: usize, pivot: f64 },
    #[error("step size underflow after repeated boundary rejections at t = {0}")]
    StepUnderflow(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("matrix entry ({0}, {1}) is not strictly positive")]
    NonPositiveEntry(usize, usize),
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("enumeration of {0} paths exceeds the brute-force cap")]
    Infeasible(f64),
    #[error("empty sample")]
    EmptySample,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
