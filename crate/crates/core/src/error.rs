use thiserror::Error;

use crate::difference::Regime;
use crate::rational::Rational;

/// Errors produced by the exact analysis and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("invalid piecewise polynomial: {0}")]
    InvalidPiecewise(String),

    #[error("domain mismatch: expected ({expected_start}, {expected_end}), found ({found_start}, {found_end})")]
    DomainMismatch {
        expected_start: Rational,
        expected_end: Rational,
        found_start: Rational,
        found_end: Rational,
    },

    #[error("point {0} lies outside the function domain")]
    OutOfDomain(Rational),

    /// The structural theory here only covers det R1 != 0, det R2 = 0. The
    /// other regimes are classified but rejected.
    #[error("stencil is in the {0} regime; only det R1 != 0, det R2 = 0 is handled (the remaining regimes follow the classical theory and are out of scope)")]
    NotPaperRegime(Regime),

    #[error("internal rank error: {0}")]
    InternalRankError(String),

    #[error("no column index l makes the reduced (N-1)x(N-1) submatrix nonsingular")]
    NoValidL,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shift matrix is singular")]
    SingularShiftMatrix,

    #[error("index ({row}, {col}) out of range for a {size}x{size} matrix")]
    IndexOutOfRange { row: usize, col: usize, size: usize },

    #[error("probe degree {degree} is below the required bound {required}")]
    ProbeTooSmall { degree: usize, required: usize },

    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("derivative of order {order} is discontinuous at interior node {node}; trace is ambiguous")]
    DiscontinuousTrace { node: Rational, order: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
