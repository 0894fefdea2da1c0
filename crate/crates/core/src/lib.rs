//! Spectral Faedo-Galerkin solver for `∂t u + (-1)^m Δ^m u + u³ - u = f` on an
//! interval, with `m = 1` (Fisher-Kolmogorov) or `m = 2` (extended
//! Fisher-Kolmogorov, optionally with the `-β u''` term).
//!
//! The solution is expanded in the first `n` eigenfunctions of the
//! m-harmonic operator, the coefficients are advanced with an IMEX scheme,
//! and [`diagnostics`] measures the discrete energy and stability bounds
//! the continuous problem satisfies.

pub mod cli;
pub mod diagnostics;
pub mod eigenbasis;
pub mod error;
pub mod integrator;
pub mod operators;
pub mod quadrature;

pub use error::{Result, SolverError};
