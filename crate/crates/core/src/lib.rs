//! Exact analysis of second-order differential-difference boundary value
//! problems on `(0, N+1)`:
//!
//! ```text
//! -(R v)''(t) = f0(t),   (R v)(t) = Σ_{j=-N..N} b_j v(t + j),
//! v = 0 (or prescribed data) on [-N, 0] ∪ [N+1, 2N+1],
//! ```
//!
//! in the regime where the shift matrix `R1` is nonsingular but its leading
//! `N x N` block `R2` is singular.
//!
//! * [`difference`]: shift matrix, regime, anchor `m` and `γ` coefficients,
//!   end-column dependence, index tables.
//! * [`piecewise`]: exact piecewise-polynomial calculus and `R_Q`.
//! * [`sobolev`]: node functionals describing image subspaces, and exact
//!   codimension counts.
//! * [`solver`]: semi-analytic generalized solutions and smoothness reports.
//! * [`oracle`]: finite-difference cross-checks in double precision.
//! * [`verify`]: the verification battery used by the CLI and the tests.

pub mod difference;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod piecewise;
pub mod poly;
pub mod rational;
pub mod sobolev;
pub mod solver;
pub mod verify;

pub use difference::{
    classify_regime, end_columns, find_alt_structure, find_structure, index_table, spectrum,
    AltGammaData, EndColumnData, GammaData, IndexTable, Regime, RegimeReport, ShiftMatrix,
    Stencil, StructureReport,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use piecewise::{
    apply_r_extended, apply_rq, apply_rq_inverse, devectorize, vectorize, NodeTraces,
    PiecewisePoly,
};
pub use poly::Poly;
pub use rational::Rational;
