//! Special functions needed by the fractional multi-step schemes.
//!
//! Everything here is self-contained f64 code (no external special-function
//! dependency) tuned for the parameter ranges the solvers actually use:
//!
//! * [`gamma_fn`] — real gamma function, Lanczos approximation, ~1e-13
//!   relative accuracy over the reachable range including reflection.
//! * [`GaussJacobiRule`] — Gauss–Jacobi quadrature on `[-1, 1]` with weight
//!   `(1-t)^a (1+t)^b`, built by the Golub–Welsch eigenvalue method.
//! * [`hyp2f1`] — Gauss hypergeometric function for `z < 1` via a single
//!   Gauss–Jacobi quadrature of its Euler integral representation. The
//!   convolution-kernel tables evaluate it thousands of times with `b = 1`
//!   and tiny `|z|`, for which a short power series is used instead.
//! * [`incomplete_beta`] — unregularized incomplete beta `B(z; a, b)` by a
//!   modified-Lentz continued fraction, accurate even as `z -> 1`.
//! * [`mittag_leffler`] — one-parameter Mittag-Leffler function `E_alpha(z)`
//!   by defended power series, used only to generate reference solutions.

mod beta;
mod gamma;
mod hyp2f1;
mod jacobi;
mod mittag_leffler;

pub use beta::{beta_fn, incomplete_beta};
pub use gamma::gamma_fn;
pub use hyp2f1::{hyp2f1, hyp2f1_with_rule};
pub(crate) use hyp2f1::hyp2f1_series_b1;
pub use jacobi::GaussJacobiRule;
pub use mittag_leffler::{mittag_leffler, mittag_leffler_grid};
