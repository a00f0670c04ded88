use thiserror::Error;

use crate::states::Representation;

/// Errors raised by the lattice, operator and experiment routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid grid, tolerance or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operator received a state in the wrong representation.
    #[error("expected a state in the {expected} representation, found {found}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    /// Two states (or a state and a sample vector) live on different lattices.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// The box is too narrow for the requested state.
    #[error("domain coverage error: tail mass {tail:e} outside the box exceeds {limit:e}")]
    DomainCoverage { tail: f64, limit: f64 },

    /// A compactly supported state would straddle the origin or leave the box.
    #[error("support error: {0}")]
    Support(String),

    /// The expectation value of a supposedly symmetric operator is not real.
    #[error("symmetry violation: imaginary part {imag:e} exceeds {bound:e}")]
    SymmetryViolation { imag: f64, bound: f64 },

    #[error("time samples must be sorted in ascending order")]
    UnsortedTimes,

    #[error("imaginary time part must be non-positive, got {0}")]
    UpperHalfPlane(f64),

    /// Split-step budget `dt * max|V| < 0.1` violated.
    #[error("step budget violated: dt * max|V| = {0} (must stay below 0.1)")]
    StepBudget(f64),

    /// A search (e.g. half-time) found no solution inside the horizon.
    #[error("not found: {0}")]
    NotFound(String),

    /// A horizon-doubling limit did not settle within the budget.
    #[error("no convergence within the horizon budget; last increments {increments:?}")]
    Convergence { increments: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
