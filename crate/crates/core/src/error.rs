use alloc::string::String;
use alloc::vec::Vec;

use crate::matrices::PsdWitness;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("expected {expected} entries, got {actual}")]
    EntryCount { expected: usize, actual: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{op} is limited to n <= {limit}, got n = {n}")]
    CostGuard {
        op: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("{op} needs n >= {min}, got n = {n}")]
    TooSmall {
        op: &'static str,
        n: usize,
        min: usize,
    },

    #[error("index ({row}, {col}) out of range for {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("vector is not unit norm (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("epsilon must lie in {lo}..={hi}, got {eps}")]
    EpsilonOutOfRange { eps: f64, lo: f64, hi: f64 },

    #[error("matrix is not Hermitian positive semidefinite: {0}")]
    NotPsd(PsdWitness),

    #[error("matrix is not Hermitian (entry ({row}, {col}) deviates by {deviation:e})")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("B has an entry outside the nonnegative cone at ({row}, {col})")]
    NegativeEntries { row: usize, col: usize },

    #[error("cannot mix exact and floating operands; convert explicitly")]
    BackendMismatch,

    #[error("exact arithmetic range exceeded: permanent bound needs {bits} bits")]
    ExactRangeExceeded { bits: u64 },

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate:e}, residual {residual:e})")]
    NonConvergence {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("per(A) = 0: degenerate instance")]
    DegenerateInstance,

    #[error("A does not violate the {conjecture} inequality (lhs {lhs:e}, rhs {rhs:e})")]
    NoSpectralViolation {
        conjecture: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("no violating epsilon found in grid ({} points scanned)", trace.len())]
    NoViolatingEpsilon { trace: Vec<(f64, f64)> },

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("certificate mismatch in {field}: stored {stored}, recomputed {recomputed}")]
    CertificateMismatch {
        field: &'static str,
        stored: String,
        recomputed: String,
    },
}
