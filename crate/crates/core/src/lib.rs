//! Quasiprobabilistic synthesis of quantum operations.
//!
//! A target operation is approximated by a signed combination of operations from a
//! finite library, found by L1-regularised least squares on Pauli transfer
//! matrices and realised by Monte Carlo sampling.

pub mod design;
pub mod error;
pub mod hexf;
pub mod library;
pub mod pauli;
pub mod pipeline;
pub mod ptm;
pub mod rng;
pub mod sampler;
pub mod solver;

pub use error::{Error, Result};
pub use ptm::{hs_distance, DensityMatrix, PauliTransferMatrix, VectorizedProcess};
