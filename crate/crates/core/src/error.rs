use alloc::string::String;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} needs {required_bytes} bytes, over the {budget_bytes} byte memory budget")]
    SizeBudget {
        what: &'static str,
        required_bytes: u128,
        budget_bytes: u128,
    },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid bitstring {text:?}: {reason}")]
    InvalidBitstring { text: String, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("step size rejected: halving dt changed the final state by {deviation:e} (tolerance {tolerance:e})")]
    StepSizeRejected { deviation: f64, tolerance: f64 },

    #[error("density matrix invariant `{invariant}` violated at t = {time}: {value:e}")]
    InvariantViolation {
        invariant: &'static str,
        time: f64,
        value: f64,
    },

    #[error("no strictly decaying eigenvalue, the spectral gap is undefined")]
    UndefinedGap,

    #[error("class members disagree on the CDEA value ({first} vs {other})")]
    InconsistentClass { first: u64, other: u64 },

    #[error("exact count overflows 128-bit integers at L = {length}")]
    CountOverflow { length: i64 },

    #[error("eigensolver failed to converge")]
    EigenSolver,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
