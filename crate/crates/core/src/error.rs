//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures surfaced by the algebraic and numerical routines.
///
/// Most variants mark a legitimate domain boundary of a local construction
/// (an open cell, a dressing domain, a composability condition) rather than a
/// programming mistake.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A leading principal pivot of a Gauss factorization vanished.
    #[error("matrix is not in the open Gauss cell (pivot {index} has modulus {modulus:.3e})")]
    NotInOpenCell { index: usize, modulus: f64 },
    /// The pair to be dressed lies outside the local dressing domain.
    #[error("pair is outside the dressing domain: {0}")]
    NotInDressingDomain(String),
    /// Two groupoid elements do not satisfy the composability condition.
    #[error("elements are not composable (mismatch {residual:.3e})")]
    NotComposable { residual: f64 },
    /// A matrix could not be factored through the requested Bruhat cell.
    #[error("matrix is not in the requested Bruhat cell: {0}")]
    NotInCell(String),
    /// A finite-difference probe left the domain of the differentiated map.
    #[error("finite-difference probe left the domain: {0}")]
    DomainEscape(String),
    /// Two index sets that must be aligned have different lengths.
    #[error("index mismatch: expected {expected}, found {found}")]
    IndexMismatch { expected: usize, found: usize },
    /// A Jacobian needed for a tangent space is numerically rank deficient.
    #[error("Jacobian is rank deficient (smallest singular value {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },
    /// A structural invariant failed on input or output data.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    /// The verification harness was configured with invalid values.
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    /// Writing or reading a report failed.
    #[error("i/o failure: {0}")]
    IoError(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
