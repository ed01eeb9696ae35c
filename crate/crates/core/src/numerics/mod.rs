//! Dense complex linear algebra and linear ODE propagation.

mod lu;
mod matrix;
mod ode;

pub use lu::{lu_solve, relative_residual, LuFactors, MAX_REFINEMENT_PASSES, PIVOT_TOLERANCE};
pub use matrix::{kronecker, CMatrix, CVector, ONE, ZERO};
pub use num_complex::Complex64 as C64;
pub use ode::{ode_propagate, MIN_STEP_FRACTION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("singular matrix: pivot {pivot:e} in column {column} below threshold {threshold:e}")]
    SingularMatrix { column: usize, pivot: f64, threshold: f64 },
    #[error("adaptive step collapsed to {step:e} at t = {time}")]
    StepUnderflow { time: f64, step: f64 },
    #[error("{context}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch { context: &'static str, expected: usize, found: usize },
    #[error("relative tolerance {0:e} outside (0, 1e-3]")]
    InvalidTolerance(f64),
    #[error("time grid must be finite, non-negative and ascending")]
    InvalidTimeGrid,
}
