//! Random unimodular matrices, diagonal gates and contra-diagonal states.
//!
//! The crate samples the unimodular, Ginibre, Hilbert-Schmidt and
//! diagonal-gate ensembles, computes operator Schmidt decompositions through
//! reshuffling, evaluates exact and conjectured spectral moments, estimates
//! entangling power and contra-diagonalizes Hermitian matrices.

pub mod error;
pub mod linalg;
pub mod rng;
pub mod ensembles;
pub mod schmidt;
pub mod quad;
pub mod moments;
pub mod contradiag;
pub mod epower;

pub use error::{Error, Result};
