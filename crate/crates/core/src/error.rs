use thiserror::Error;

use crate::cloning::Mode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("invalid probability vector {probs:?}")]
    InvalidProbabilities { probs: [f64; 4] },

    #[error("beta coordinates ({0}, {1}, {2}) lie outside the Bell-diagonal tetrahedron")]
    OutsideTetrahedron(f64, f64, f64),

    #[error("mixing parameter {0} outside [0, 1]")]
    MixParam(f64),

    #[error("machine parameter {lambda} outside [0, {max}] for {mode} cloning")]
    LambdaOutOfRange { mode: Mode, lambda: f64, max: f64 },

    #[error("machine configured for {actual} cloning, {expected} requested")]
    ModeMismatch { expected: Mode, actual: Mode },

    #[error("basis matrix is not unitary (residual {residual:.3e})")]
    NonUnitaryBasis { residual: f64 },

    #[error("triangle is degenerate (area {area:.3e})")]
    DegenerateTriangle { area: f64 },

    #[error("point is not strictly inside the triangle")]
    ExteriorPoint,

    #[error("cloner dimension {0} unsupported (expected 2 or 4)")]
    UnsupportedDimension(usize),

    #[error(
        "no isometry exists for dimension {dim} at lambda {lambda}: c^2 = 1 - 2(M-1)lambda needs lambda <= {max}"
    )]
    NotConstructible { dim: usize, lambda: f64, max: f64 },

    #[error("invalid subsystem selection {keep:?} for {factors} factors")]
    InvalidKeep { keep: Vec<usize>, factors: usize },

    #[error("factor dimensions {dims:?} do not match matrix size {size}")]
    FactorMismatch { dims: Vec<usize>, size: usize },

    #[error("grid resolution {0} outside (0, 0.1]")]
    Resolution(f64),

    #[error("sample count must be at least 1")]
    SampleCount,
}
