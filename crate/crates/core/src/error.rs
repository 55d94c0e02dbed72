//! Error type shared across the crate.
//!
//! Validation errors name the offending entry and the violated invariant so
//! a caller can fix its input without digging through internals. Numeric
//! failures carry enough context (iteration, magnitude) to be reportable.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("local dimension {dim} at site {site} must be at least 2")]
    BadLocalDimension { site: usize, dim: usize },

    #[error("total dimension overflows usize for local dimensions {dims:?}")]
    DimensionOverflow { dims: Vec<usize> },

    #[error("party list {indices:?} must be strictly increasing")]
    UnsortedParties { indices: Vec<usize> },

    #[error("party index {index} out of range for a {n_sites}-site system")]
    PartyOutOfRange { index: usize, n_sites: usize },

    #[error("matrix is {rows}x{cols} but the shape requires {expected}x{expected}")]
    MatrixSizeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("shape mismatch: {context} expected local dimensions {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error(
        "matrix is not Hermitian: |M - M^H| reaches {deviation:.3e} at entry \
         ({row},{col}), tolerance {tolerance:.3e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("trace {trace:.12} deviates from 1 by more than {tolerance:.3e}")]
    TraceNotOne { trace: f64, tolerance: f64 },

    #[error(
        "matrix is not positive semidefinite: smallest eigenvalue {lambda_min:.6e} \
         is below -{tolerance:.3e}"
    )]
    NotPositive { lambda_min: f64, tolerance: f64 },

    #[error("non-finite entry at ({row},{col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("marginals {first} and {second} declare the same party set {parties:?}")]
    DuplicateSubset {
        first: usize,
        second: usize,
        parties: Vec<usize>,
    },

    #[error("marginal {index} covers no sites")]
    EmptyMarginal { index: usize },

    #[error(
        "marginals are mutually inconsistent: overlap {parties:?} of marginals \
         {first} and {second} differs by {distance:.3e} (tolerance {tolerance:.3e})"
    )]
    InconsistentMarginals {
        first: usize,
        second: usize,
        parties: Vec<usize>,
        distance: f64,
        tolerance: f64,
    },

    #[error(
        "closed form over {count} marginals would expand {terms} intersection \
         terms; the supported maximum is {limit} marginals"
    )]
    ClosedFormTooLarge {
        count: usize,
        terms: u128,
        limit: usize,
    },

    #[error("imposition order {order:?} is not a permutation of 0..{len}")]
    BadImpositionOrder { order: Vec<usize>, len: usize },

    #[error("rank {rank} is not in 1..={dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("{context}: value does not fit in 128 bits")]
    CountOverflow { context: &'static str },

    #[error(
        "{n} sites of dimension {local_dim} need roughly {estimate_bytes} bytes \
         per dense operator; refusing above {limit_bytes}"
    )]
    SystemTooLarge {
        n: usize,
        local_dim: usize,
        estimate_bytes: u128,
        limit_bytes: u128,
    },

    #[error("{context} must satisfy {requirement}, got {got}")]
    BadArgument {
        context: &'static str,
        requirement: &'static str,
        got: String,
    },

    #[error("eigendecomposition produced non-finite values{}", iteration_suffix(*.iteration))]
    EigenFailure { iteration: Option<usize> },

    #[error("iteration {iteration} produced a non-finite distance")]
    Diverged { iteration: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {detail}")]
    FileFormat { path: PathBuf, detail: String },
}

fn iteration_suffix(iteration: Option<usize>) -> String {
    match iteration {
        Some(i) => format!(" at iteration {i}"),
        None => String::new(),
    }
}
