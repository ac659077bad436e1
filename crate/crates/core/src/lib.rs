//! Lifted (trace-relaxed) phase retrieval with three low-complexity solvers
//! and a direct-detection mode-division-multiplexing channel simulator.
//!
//! Each unknown vector `h_l` is recovered from intensities
//! `d_l^(n) = |h_l^H x^(n)|² + noise` by minimizing
//! `tr(C) + λ Σ_n (x^(n)H C x^(n) − d_l^(n))²` over the PSD cone and taking
//! the principal component of the minimizer.

pub mod error;
pub mod experiment;
pub mod flops;
pub mod linalg;
pub mod objective;
pub mod oracles;
pub mod sim;
pub mod solvers;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use linalg::{CVector, ComplexMatrix, HermitianMatrix};
pub use objective::{MeasurementSet, ObjectiveValue};
pub use solvers::{Method, SolverConfig, SolverResult};
