//! Finite-N spectral statistics for the chirality-preserving crossover
//! between the Gaussian unitary ensemble and the chiral unitary ensemble.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub(crate) mod dd;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod groupint;
pub mod kernels;
pub mod linalg;
pub mod montecarlo;
pub(crate) mod moments;
pub mod polynomials;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
