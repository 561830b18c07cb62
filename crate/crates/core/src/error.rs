use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("inverted element {element}: jacobian {jacobian:.3e} at ({xi:.3}, {eta:.3})")]
    InvertedElement {
        element: usize,
        jacobian: f64,
        xi: f64,
        eta: f64,
    },
    #[error("unsupported degree {degree} for {what}")]
    UnsupportedDegree { what: &'static str, degree: usize },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero pivot in row {0}")]
    ZeroPivot(usize),
    #[error("lumped mass has non-positive row sum in row {0}")]
    SingularLump(usize),
    #[error("{method} did not converge in {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("{method} broke down after {iterations} iterations")]
    Breakdown { method: &'static str, iterations: usize },
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("point ({0:.6}, {1:.6}) is outside the mesh")]
    PointOutside(f64, f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
