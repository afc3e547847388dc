//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants are
//! deliberately coarse: they distinguish *what kind* of failure occurred
//! (domain violation, non-convergence, ill-conditioning, …) and carry enough
//! context to produce an actionable message, but no more.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors produced by the solver kernels.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation
    /// (e.g. a gamma-function pole, `alpha` outside `(0, 1]`, `z >= 1` for
    /// the hypergeometric integral representation).
    Domain(String),

    /// A parameter combination the implementation deliberately rejects
    /// (e.g. interpolation degree other than 0 or 1).
    Unsupported(String),

    /// An iterative procedure exhausted its iteration budget without meeting
    /// its tolerance.
    NoConvergence {
        /// Short description of what was being iterated.
        what: String,
        /// Number of iterations performed before giving up.
        iterations: usize,
        /// Residual (or last increment size) when iteration stopped.
        residual: f64,
    },

    /// A Picard iteration on the global space-time system failed to contract.
    /// Carries the residual history so callers can inspect the divergence.
    PicardDiverged {
        /// Iterations performed.
        iterations: usize,
        /// Residual after the final iteration.
        residual: f64,
        /// Sup-norm increment after each iteration, in order.
        history: Vec<f64>,
    },

    /// A linear system was too ill-conditioned to solve reliably.
    IllConditioned {
        /// Description of the offending system.
        what: String,
        /// Estimated infinity-norm condition number.
        cond: f64,
    },

    /// A matrix factorization encountered a zero pivot.
    Singular {
        /// Description of the matrix.
        what: String,
    },

    /// Inconsistent dimensions between arguments.
    Shape(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::NoConvergence {
                what,
                iterations,
                residual,
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::PicardDiverged {
                iterations,
                residual,
                ..
            } => write!(
                f,
                "Picard iteration on the global system did not converge after \
                 {iterations} iterations (residual {residual:.3e})"
            ),
            Error::IllConditioned { what, cond } => write!(
                f,
                "{what} is too ill-conditioned (estimated condition number {cond:.3e})"
            ),
            Error::Singular { what } => write!(f, "{what} is singular"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
