use alloc::string::String;

use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("channel is not CPTP (trace residual {trace_residual:e}, min Choi eigenvalue {min_choi_eigenvalue:e})")]
    NotCptp { trace_residual: f64, min_choi_eigenvalue: f64 },
    #[error("matrix is numerically singular (singular value ratio {ratio:e})")]
    SingularInput { ratio: f64 },
    #[error("matrix is not normal (commutator residual {residual:e})")]
    NotNormal { residual: f64 },
    #[error("{what} did not converge (residual {residual:e})")]
    NotConverged { what: &'static str, residual: f64 },
    #[error("input is not irreducible")]
    NotIrreducible,
    #[error("reducible input but no reducing projection was located")]
    WitnessNotFound,
    #[error("peripheral eigenvalue {eigenvalue} is not numerically simple (singular values {s_min:e}, {s_next:e})")]
    SimplicityViolation { eigenvalue: C64, s_min: f64, s_next: f64 },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("operation requires a finite cycle base")]
    UnsupportedBase,
    #[error("global operator of size {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("no order m <= {dim} brings {alpha} into the Koopman group")]
    OrderNotFound { alpha: C64, dim: usize },
    #[error("eigenmatrix block at point {point} is not unitary (residual {residual:e})")]
    NotUnitary { point: usize, residual: f64 },
    #[error("spectrum mismatch at point {point}: {detail}")]
    SpectrumMismatch { point: usize, detail: String },
    #[error("no stopping time within horizon {horizon}")]
    HorizonTooShort { horizon: u64 },
    #[error("{0} is not a Koopman eigenvalue of the base")]
    NotAnEigenvalue(C64),
    #[error("rotation number {t} is within the guard of a rational with denominator {q}")]
    RationalRotation { t: f64, q: u64 },
    #[error("base is not ergodic")]
    NotErgodic,
    #[error("reducing-subspace search is not exhaustive at rank {rank}")]
    SearchInconclusive { rank: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
