//! Numerical kernels for solving Caputo-type fractional differential
//! equations
//!
//! ```text
//!     D^alpha u(t) = lambda u(t) + f(t, u(t)),   u(0) = u0,   0 < alpha <= 1,
//! ```
//!
//! where `D^alpha` is the Caputo derivative, `lambda` is a (possibly stiff)
//! scalar or matrix, and `f` is a nonlinear forcing term.
//!
//! The crate provides two families of multi-step methods built on piecewise
//! Lagrange reconstruction of the Riemann–Liouville memory integral:
//!
//! * **Fractional Adams–Moulton** ([`stepper::solve_famm`],
//!   [`stepper::solve_famm_corrected`]): the whole right-hand side is treated
//!   implicitly with degree-`p` interpolation on the current window
//!   (`p ∈ {0, 1}`, giving first and second order).
//! * **Implicit–explicit (IMEX)** ([`stepper::solve_imex`]): the linear part
//!   `lambda u` stays implicit while `f` is extrapolated from known steps, so
//!   each step costs one *linear* solve even for nonlinear `f`.
//!
//! Both families support *starting corrections* ([`corrections`]) that recover
//! the design order when the solution behaves like a sum of fractional powers
//! `t^{sigma}` near `t = 0`, as Caputo solutions generically do.
//!
//! On top of the step-by-step reference solvers, [`fastsolve`] assembles all
//! `N` steps into one block lower-triangular Toeplitz system, embeds it in an
//! epsilon-circulant, and solves it with FFT diagonalization plus Picard
//! iteration in `O(N log N)` work. [`stability`] computes linear stability
//! regions of the schemes by the boundary-locus method.
//!
//! # `no_std`
//!
//! The crate is `no_std`-compatible (it always requires `alloc`). Disable the
//! default `std` feature and enable `libm` to build for targets without the
//! standard library:
//!
//! ```toml
//! fide-core = { version = "0.1", default-features = false, features = ["libm"] }
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod coeffs;
pub mod corrections;
pub mod error;
pub mod fastsolve;
pub mod fft;
pub mod specfun;
pub mod stability;
pub mod stepper;

mod linalg;
mod math;

pub use error::{Error, Result};
