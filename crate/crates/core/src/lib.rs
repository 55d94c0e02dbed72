//! Tools for the quantum marginal problem built around marginal imposition
//! operators: affine maps that overwrite selected reduced states of a density
//! matrix while leaving complementary observables untouched.
//!
//! The crate covers the full pipeline: multipartite shapes and dense Hermitian
//! operators ([`shape`], [`operator`]), the imposition maps and their closed
//! form ([`imposition`]), analytic feasibility tools ([`analytic`]), random
//! state generation ([`sampling`]), iterative reconstruction of global states
//! from marginals ([`reconstruct`]), and batch experiments ([`experiments`]).
//!
//! All numerics are generic over the real scalar via [`Scalar`] (`f32` or
//! `f64`); the aliases below fix `f64`, which is what the CLI and the JSON
//! layer use.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod imposition;
pub mod io;
pub mod marginals;
pub mod operator;
pub mod reconstruct;
pub mod sampling;
pub mod scalar;
pub mod shape;

pub use error::{Error, Result};
pub use marginals::MarginalSet;
pub use operator::{DensityMatrix, HermitianOperator};
pub use scalar::Scalar;
pub use shape::{PartySubset, SystemShape};

/// Double precision Hermitian operator, the default working type.
pub type HermitianOperator64 = operator::HermitianOperator<f64>;
/// Double precision density matrix.
pub type DensityMatrix64 = operator::DensityMatrix<f64>;
/// Double precision marginal set.
pub type MarginalSet64 = marginals::MarginalSet<f64>;
