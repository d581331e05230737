use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: squared norm {norm_sq:.17e} deviates from 1 by more than {tol:e}")]
    NotNormalized { norm_sq: f64, tol: f64 },

    #[error("state vector has zero or non-finite norm")]
    DegenerateState,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M_jk - conj(M_kj)| = {asymmetry:e} exceeds {tol:e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("basis is not orthonormal: max |<p_j|p_k> - delta_jk| = {deviation:e} exceeds {tol:e}")]
    NotOrthonormal { deviation: f64, tol: f64 },

    #[error("dimension {dim} does not factor as {d_a} x {d_b}")]
    NotFactorizable { dim: usize, d_a: usize, d_b: usize },

    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("monte carlo estimate refused: {0}")]
    MonteCarloRefused(String),
}
