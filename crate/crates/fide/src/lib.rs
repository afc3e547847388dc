//! Benchmark harness and command-line front end for the `fide-core`
//! fractional-differential-equation solvers.
//!
//! The library side provides:
//!
//! * [`registry`] — five built-in Caputo initial-value problems (stiff
//!   linear systems, Mittag-Leffler relaxation, nonlinear and oscillatory
//!   forcings) with exact solutions where available and per-problem
//!   defaults (scheme, correction powers, Picard tolerance);
//! * [`runner`] — convergence studies over step-size ladders (parallel
//!   across runs), benchmark-based error measurement for problems without
//!   a closed form, and fast-vs-reference timing sweeps;
//! * [`io`] — CSV and JSON writers with stable column layouts plus a JSON
//!   config sidecar so every CSV can be reproduced from its neighbour file.
//!
//! The binary (`fide`) wires these together; see `fide --help` or the
//! [`cli`] module.

#![deny(unsafe_code)]
#![warn(missing_docs)]

pub mod cli;
pub mod io;
pub mod registry;
pub mod runner;
