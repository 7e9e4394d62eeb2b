//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, assembly, propagation, and
/// spectral analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A model specification violates its invariants (wrong coupling for the
    /// model kind, negative or non-finite rate, N < 1, ...).
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    /// A vector or matrix dimension does not match the generator size.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A requested problem size exceeds a configured storage or dense-work cap.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The adaptive integrator could not meet its tolerances.
    #[error("integration failure: {0}")]
    Integration(String),

    /// The QR eigenvalue iteration failed to converge.
    #[error("eigensolve failure: {0}")]
    Eigensolve(String),

    /// A function was evaluated outside its parameter domain
    /// (e.g. a scrambling-phase formula with r >= 1).
    #[error("parameter domain violation: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
