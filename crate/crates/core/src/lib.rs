//! Stationary distributions of finite Markov chains by block power
//! iteration with residual-minimizing extraction.
//!
//! The pieces: CSR storage of P^T with stochasticity checking
//! ([`sparse`]), unnormalized block iteration plus checkpoint
//! decompositions and a sliding-window variant ([`solver`]), the small
//! dense kernels they lean on ([`kernels`]), MatrixMarket I/O ([`io`]),
//! and chain generators with brute-force oracles for testing
//! ([`chains`]).

pub mod block;
pub mod chains;
pub mod error;
pub mod io;
pub mod kernels;
mod rng;
pub mod solver;
pub mod sparse;

pub use block::DenseBlock;
pub use error::{Error, Result};
pub use solver::{
    fit_convergence_rate, solve, ConvergenceReport, Extraction, SolverConfig, Status,
};
pub use sparse::SparseTransitionMatrix;
