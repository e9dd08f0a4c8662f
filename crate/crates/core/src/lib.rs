//! Simulated hybrid iterative phase estimation solvers for `A x = b`.
//!
//! The quantum side extracts eigenvalue bit strings and overlap magnitudes by
//! running phase-estimation iterations on a dense statevector. The classical
//! side recovers eigenvector magnitudes, resolves signs and assembles `x`.

pub mod binary;
pub mod cli;
pub mod engine;
pub mod error;
pub mod extraction;
pub mod fixture;
pub mod hhl;
pub mod numerics;
pub mod reconstruction;
pub mod statevector;
